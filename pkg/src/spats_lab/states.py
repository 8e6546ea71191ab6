"""Thermal, Fock and photon-added thermal states, and the loss channel.

All states are phase-independent, so everything here works on photon-number
populations. Constructors renormalize over the truncated space and record the
discarded probability in ``tail_mass_bound``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, InvalidDimensionError, TruncationError, UnsupportedInputError
from .fock import FockDensityMatrix, annihilation_matrix

DEFAULT_DIM = 40
HEADROOM_TOL = 1e-8


def _check_nbar(nbar: float) -> float:
    nbar = float(nbar)
    if not np.isfinite(nbar) or nbar < 0:
        raise DomainError(f"mean photon number must be >= 0, got {nbar}")
    return nbar


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not (0.0 <= eta <= 1.0):
        raise DomainError(f"efficiency must lie in [0, 1], got {eta}")
    return eta


def _check_dim(dim: int) -> int:
    if int(dim) != dim or dim < 2:
        raise InvalidDimensionError(f"dim must be an integer >= 2, got {dim}")
    return int(dim)


def thermal_state(nbar: float, dim: int = DEFAULT_DIM) -> FockDensityMatrix:
    """Bose-Einstein state ``p_n = nbar^n / (1 + nbar)^(n+1)``."""
    nbar = _check_nbar(nbar)
    dim = _check_dim(dim)
    if nbar == 0:
        return fock_state(0, dim)
    x = nbar / (1.0 + nbar)
    p = x ** np.arange(dim) / (1.0 + nbar)
    tail = x**dim
    return FockDensityMatrix.from_populations(p / p.sum(), tail)


def fock_state(n: int, dim: int = DEFAULT_DIM) -> FockDensityMatrix:
    dim = _check_dim(dim)
    if int(n) != n or not 0 <= n < dim:
        raise InvalidDimensionError(f"Fock index {n} outside [0, {dim})")
    p = np.zeros(dim)
    p[int(n)] = 1.0
    return FockDensityMatrix.from_populations(p)


def add_photon(rho: FockDensityMatrix) -> FockDensityMatrix:
    """Heralded photon addition ``a^dag rho a / Tr(a^dag rho a)``."""
    diag = rho.populations
    if rho.trace <= 0:
        raise DomainError("input state has zero trace")
    if np.any(diag[-2:] > HEADROOM_TOL):
        raise TruncationError("top Fock levels are populated; enlarge dim before adding a photon")
    ad = annihilation_matrix(rho.dim).conj().T
    out = ad @ rho.elements @ ad.conj().T
    norm = out.diagonal().real.sum()
    return FockDensityMatrix(out / norm, rho.tail_mass_bound)


def spats_populations(nbar: float, dim: int) -> tuple[np.ndarray, float]:
    """Populations of the photon-added thermal state and the truncated tail mass."""
    nbar = _check_nbar(nbar)
    n = np.arange(dim, dtype=float)
    if nbar == 0:
        p = np.zeros(dim)
        p[1] = 1.0
        return p, 0.0
    x = nbar / (1.0 + nbar)
    p = x**n * n / (nbar * (nbar + 1.0))
    # tail sum_{n>=dim} n x^n (1-x)^2 / x in closed form
    tail = x ** (dim - 1) * (dim - (dim - 1) * x)
    return p / p.sum(), float(tail)


def spats(nbar: float, dim: int = DEFAULT_DIM) -> FockDensityMatrix:
    """Single-photon-added thermal state with seed mean photon number ``nbar``.

    ``nbar = 0`` returns the single-photon Fock state, the limit of the closed form.
    """
    dim = _check_dim(dim)
    p, tail = spats_populations(nbar, dim)
    return FockDensityMatrix.from_populations(p, tail)


def loss_matrix(eta: float, dim: int) -> np.ndarray:
    """Column-stochastic matrix ``L[n, m] = C(m, n) eta^n (1-eta)^(m-n)``."""
    eta = _check_eta(eta)
    m = np.arange(dim)[None, :]
    n = np.arange(dim)[:, None]
    keep = n <= m
    L = np.zeros((dim, dim))
    if eta == 1.0:
        return np.eye(dim)
    if eta == 0.0:
        L[0, :] = 1.0
        return L
    nn, mm = np.broadcast_arrays(n, m)
    nk, mk = nn[keep], mm[keep]
    logc = gammaln(mk + 1) - gammaln(nk + 1) - gammaln(mk - nk + 1)
    L[keep] = np.exp(logc + nk * np.log(eta) + (mk - nk) * np.log1p(-eta))
    return L


def loss_channel(rho: FockDensityMatrix, eta: float) -> FockDensityMatrix:
    """Transmission through a beam splitter of transmittivity ``eta`` with vacuum in the other port."""
    if not rho.is_diagonal():
        raise UnsupportedInputError("loss channel is implemented for diagonal states only")
    eta = _check_eta(eta)
    p = loss_matrix(eta, rho.dim) @ rho.populations
    p = np.clip(p, 0.0, None)
    return FockDensityMatrix.from_populations(p, rho.tail_mass_bound)


def mean_photon_from_trigger_ratio(rate_injected: float, rate_blocked: float) -> float:
    """Seed mean photon number from heralding rates with and without the thermal seed.

    The idler rate scales as ``1 + nbar`` in the low-gain regime.
    """
    if rate_blocked <= 0 or rate_injected <= 0:
        raise DomainError("count rates must be positive")
    ratio = rate_injected / rate_blocked
    if ratio < 1.0:
        raise DomainError(f"rate ratio {ratio} < 1 would imply a negative mean photon number")
    return ratio - 1.0


_KINDS = ("vacuum", "fock", "thermal", "spats")
_DESCRIPTOR_RE = re.compile(r"^\s*([a-z]+)\s*(?:\((.*)\))?\s*$", re.IGNORECASE | re.DOTALL)


@dataclass(frozen=True)
class StateDescriptor:
    """Textual recipe for a model state, e.g. ``spats(nbar=1.15, eta=0.62, dim=40)``."""

    kind: str
    nbar: float = 0.0
    eta: float = 1.0
    dim: int = DEFAULT_DIM
    n: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown state kind {self.kind!r}; expected one of {_KINDS}")
        _check_nbar(self.nbar)
        _check_eta(self.eta)
        _check_dim(self.dim)
        if self.kind == "fock" and not 0 <= self.n < self.dim:
            raise InvalidDimensionError(f"Fock index {self.n} outside [0, {self.dim})")

    @classmethod
    def parse(cls, text: str) -> "StateDescriptor":
        m = _DESCRIPTOR_RE.match(text)
        if not m:
            raise DomainError(f"cannot parse state descriptor {text!r}")
        kind = m.group(1).lower()
        kwargs: dict = {}
        args = (m.group(2) or "").strip()
        positional_key = {"fock": "n", "thermal": "nbar", "spats": "nbar"}.get(kind)
        for i, item in enumerate(a for a in args.split(",") if a.strip()):
            if "=" in item:
                key, val = (s.strip().lower() for s in item.split("=", 1))
            elif i == 0 and positional_key:
                key, val = positional_key, item.strip()
            else:
                raise DomainError(f"unexpected positional argument {item.strip()!r} in {text!r}")
            if key in ("n̄", "mean"):
                key = "nbar"
            if key in ("η", "efficiency"):
                key = "eta"
            if key not in ("nbar", "eta", "dim", "n"):
                raise DomainError(f"unknown parameter {key!r} in {text!r}")
            try:
                kwargs[key] = int(val) if key in ("dim", "n") else float(val)
            except ValueError:
                raise DomainError(f"bad value {val!r} for {key} in {text!r}") from None
        return cls(kind=kind, **kwargs)

    def __str__(self) -> str:
        if self.kind == "vacuum":
            inner = []
        elif self.kind == "fock":
            inner = [f"n={self.n}"]
        else:
            inner = [f"nbar={self.nbar:g}"]
        inner += [f"eta={self.eta:g}", f"dim={self.dim}"]
        return f"{self.kind}({', '.join(inner)})"

    def ideal(self) -> FockDensityMatrix:
        if self.kind == "vacuum":
            return fock_state(0, self.dim)
        if self.kind == "fock":
            return fock_state(self.n, self.dim)
        if self.kind == "thermal":
            return thermal_state(self.nbar, self.dim)
        return spats(self.nbar, self.dim)

    def build(self) -> FockDensityMatrix:
        """The detected state: the ideal state followed by the loss channel."""
        return loss_channel(self.ideal(), self.eta)


def lossy_spats(nbar: float, eta: float, dim: int = DEFAULT_DIM) -> FockDensityMatrix:
    return loss_channel(spats(nbar, dim), eta)
