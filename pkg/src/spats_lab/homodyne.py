"""Homodyne statistics of phase-independent states.

Quadratures follow ``x = (a e^{-i theta} + a^dag e^{i theta}) / 2`` so the
vacuum has variance 1/4. Diagonal states have phase-independent, even
quadrature distributions, so no phase argument appears anywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import DatasetError, DomainError, GridCoverageError
from .fock import FockDensityMatrix
from .phasespace import laguerre_series

MAX_HERMITE_ORDER = 200
CDF_POINTS = 16384
DEFAULT_K_GRID = np.round(np.arange(0.0, 12.0 + 1e-9, 0.1), 10)


def hermite_functions(nmax: int, x) -> np.ndarray:
    """Position wavefunctions ``psi_0 .. psi_nmax`` at ``x``; shape ``(nmax + 1,) + x.shape``.

    Uses the normalized recurrence
    ``psi_{n+1} = 2x psi_n / sqrt(n+1) - sqrt(n/(n+1)) psi_{n-1}``.
    """
    if not 0 <= nmax <= MAX_HERMITE_ORDER:
        raise DomainError(f"Hermite order must lie in [0, {MAX_HERMITE_ORDER}], got {nmax}")
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = (2.0 / np.pi) ** 0.25 * np.exp(-(x**2))
    if nmax >= 1:
        out[1] = 2.0 * x * out[0]
    for n in range(1, nmax):
        out[n + 1] = 2.0 * x * out[n] / np.sqrt(n + 1) - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


def hermite_psi(n: int, x):
    out = hermite_functions(n, x)[n]
    return float(out) if out.ndim == 0 else out


def quadrature_pdf(rho: FockDensityMatrix, x):
    """``p(x) = sum_n p_n psi_n(x)^2``."""
    p = rho.require_diagonal()
    psi = hermite_functions(p.size - 1, x)
    out = np.tensordot(p, psi**2, axes=1)
    return float(out) if np.ndim(out) == 0 else out


def quadrature_half_width(dim: int) -> float:
    """Half-width of the sampling window: classical turning point of the top level plus margin."""
    return max(6.0, float(np.sqrt((2 * (dim - 1) + 1) / 2.0)) + 3.0)


@dataclass(frozen=True)
class QuadratureDataset:
    samples: np.ndarray
    seed: int | None = None
    source: str = ""
    count: int = field(init=False)

    def __post_init__(self):
        s = np.array(self.samples, dtype=float, copy=True).ravel()
        if s.size < 1:
            raise DatasetError("dataset must contain at least one sample")
        if not np.all(np.isfinite(s)):
            raise DatasetError("dataset contains non-finite samples")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "count", int(s.size))

    def metadata(self) -> dict:
        return {"seed": self.seed, "count": self.count, "state": self.source}

    def save(self, csv_path) -> Path:
        """Write ``x`` CSV plus a ``.json`` sidecar; returns the sidecar path."""
        csv_path = Path(csv_path)
        with open(csv_path, "w") as fh:
            fh.write("x\n")
            fh.writelines(f"{v:.17g}\n" for v in self.samples)
        meta = csv_path.with_suffix(".json")
        meta.write_text(json.dumps(self.metadata(), indent=2) + "\n")
        return meta

    @classmethod
    def load(cls, csv_path) -> "QuadratureDataset":
        csv_path = Path(csv_path)
        try:
            with open(csv_path) as fh:
                header = fh.readline().strip()
                if header != "x":
                    raise DatasetError(f"{csv_path}: expected header 'x', got {header!r}")
                values = [float(line) for line in fh if line.strip()]
        except (OSError, ValueError) as exc:
            raise DatasetError(f"cannot read dataset {csv_path}: {exc}") from None
        seed, source = None, ""
        meta = csv_path.with_suffix(".json")
        if meta.exists():
            try:
                info = json.loads(meta.read_text())
            except json.JSONDecodeError as exc:
                raise DatasetError(f"bad metadata {meta}: {exc}") from None
            seed, source = info.get("seed"), info.get("state", "")
            if info.get("count") not in (None, len(values)):
                raise DatasetError(f"{csv_path}: metadata count {info['count']} != {len(values)} samples")
        if not values:
            raise DatasetError(f"{csv_path}: no samples")
        return cls(np.array(values), seed, source)


@lru_cache(maxsize=32)
def _cdf_table(populations: tuple, points: int) -> tuple[np.ndarray, np.ndarray]:
    p = np.array(populations)
    half = quadrature_half_width(p.size)
    x = np.linspace(-half, half, points)
    pdf = np.tensordot(p, hermite_functions(p.size - 1, x) ** 2, axes=1)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(x))])
    cdf /= cdf[-1]
    return x, cdf


def sampling_cdf(rho: FockDensityMatrix, points: int = CDF_POINTS) -> tuple[np.ndarray, np.ndarray]:
    """Grid and normalized cumulative distribution used by the sampler."""
    return _cdf_table(tuple(rho.require_diagonal()), points)


def sample_quadratures(rho: FockDensityMatrix, count: int, seed: int, source: str = "") -> QuadratureDataset:
    """Draw ``count`` i.i.d. homodyne outcomes by inverse-CDF lookup."""
    if count < 1:
        raise DatasetError("count must be >= 1")
    x, cdf = sampling_cdf(rho)
    rng = np.random.default_rng(seed)
    u = rng.random(int(count))
    return QuadratureDataset(np.interp(u, cdf, x), seed, source)


@dataclass(frozen=True)
class CharacteristicCurve:
    """Real part of the quadrature characteristic function on a k grid."""

    k_values: np.ndarray
    g_values: np.ndarray
    std_errors: np.ndarray
    imag_values: np.ndarray | None = None

    def __post_init__(self):
        for name in ("k_values", "g_values", "std_errors"):
            a = np.array(getattr(self, name), dtype=float, copy=True)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if not (self.k_values.shape == self.g_values.shape == self.std_errors.shape):
            raise DomainError("k, g and std_error arrays must have equal length")

    def at(self, k) -> tuple[np.ndarray, np.ndarray]:
        """Values and errors at ``k``; exact grid hits are used directly, others spline-interpolated."""
        k = np.abs(np.asarray(k, dtype=float))
        lo, hi = self.k_values.min(), self.k_values.max()
        if np.any(k < lo - 1e-12) or np.any(k > hi + 1e-12):
            raise GridCoverageError(f"k outside curve range [{lo}, {hi}]")
        idx = np.searchsorted(self.k_values, k)
        idx = np.clip(idx, 0, self.k_values.size - 1)
        hit = np.abs(self.k_values[idx] - k) < 1e-12
        left = np.clip(idx - 1, 0, None)
        hit_left = np.abs(self.k_values[left] - k) < 1e-12
        g = np.empty_like(k)
        e = np.empty_like(k)
        g[hit], e[hit] = self.g_values[idx[hit]], self.std_errors[idx[hit]]
        g[hit_left], e[hit_left] = self.g_values[left[hit_left]], self.std_errors[left[hit_left]]
        miss = ~(hit | hit_left)
        if np.any(miss):
            from scipy.interpolate import CubicSpline

            g[miss] = CubicSpline(self.k_values, self.g_values)(k[miss])
            e[miss] = np.interp(k[miss], self.k_values, self.std_errors)
        return g, e


def empirical_characteristic(ds: QuadratureDataset, k_values=DEFAULT_K_GRID, chunk: int = 20000) -> CharacteristicCurve:
    """``g(k) = mean cos(k x_j)`` with standard error ``std(cos(k x_j)) / sqrt(N)``."""
    if ds.count < 1:
        raise DatasetError("empty dataset")
    k = np.asarray(k_values, dtype=float)
    s_cos = np.zeros_like(k)
    s_cos2 = np.zeros_like(k)
    s_sin = np.zeros_like(k)
    for start in range(0, ds.count, chunk):
        phase = np.outer(ds.samples[start : start + chunk], k)
        c = np.cos(phase)
        s_cos += c.sum(axis=0)
        s_cos2 += (c * c).sum(axis=0)
        s_sin += np.sin(phase).sum(axis=0)
    n = ds.count
    g = s_cos / n
    var = np.clip(s_cos2 / n - g**2, 0.0, None) * n / max(n - 1, 1)
    err = np.sqrt(var / n)
    err[k == 0] = 0.0
    g[k == 0] = 1.0
    return CharacteristicCurve(k, g, err, s_sin / n)


def vacuum_characteristic(k):
    k = np.asarray(k, dtype=float)
    out = np.exp(-(k**2) / 8.0)
    return float(out) if out.ndim == 0 else out


def analytic_characteristic(rho: FockDensityMatrix, k_values=DEFAULT_K_GRID) -> CharacteristicCurve:
    """Noise-free ``G(k) = e^{-k^2/8} sum_n p_n L_n(k^2/4)``."""
    p = rho.require_diagonal()
    k = np.asarray(k_values, dtype=float)
    g = np.exp(-(k**2) / 8.0) * laguerre_series(p, k**2 / 4.0)
    return CharacteristicCurve(k, g, np.zeros_like(k))


def analytic_vacuum_curve(k_values=DEFAULT_K_GRID) -> CharacteristicCurve:
    k = np.asarray(k_values, dtype=float)
    return CharacteristicCurve(k, vacuum_characteristic(k), np.zeros_like(k))
