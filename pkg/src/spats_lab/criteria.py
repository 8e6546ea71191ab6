"""Nonclassicality tests for phase-independent single-mode states.

Every test returns a :class:`CriterionReport`. The verdict compares the margin
by which the test's inequality holds against ``sigma_threshold`` times its
statistical uncertainty:

* ``nonclassical``: margin > threshold * sigma (and margin > 0),
* ``classical``: the inequality fails by more than threshold * sigma,
* ``indeterminate``: everything in between, including exact ties.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, GridCoverageError, InvalidDimensionError, TruncationError
from .fock import FockDensityMatrix, TwoModeDensityMatrix, log_negativity
from .homodyne import CharacteristicCurve, QuadratureDataset
from .phasespace import TWO_OVER_PI, wigner_origin
from .tomography import DiagonalEstimate, maxlik_diagonal

SIGMA_THRESHOLD = 3.0
CRITERIA = ("wigner0", "rv1", "rv2", "klyshko", "ep")
TAIL_LIMIT = 1e-6
MAX_TWO_MODE_DIM = 1500
# margins this small are floating-point ties, not violations
MARGIN_EPS = 1e-12


@dataclass
class CriterionReport:
    criterion: str
    value: float
    sigma: float
    verdict: str
    details: dict = field(default_factory=dict)

    @property
    def significance(self) -> float:
        """Margin in units of sigma (inf for exact, noise-free inputs)."""
        margin = self.details.get("margin", self.value)
        if self.sigma > 0:
            return margin / self.sigma
        return np.inf if margin > 0 else (-np.inf if margin < 0 else 0.0)

    def to_json(self) -> dict:
        d = asdict(self)
        d["value"] = float(self.value)
        d["sigma"] = float(self.sigma)
        d["details"] = {k: _plain(v) for k, v in self.details.items()}
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v


def verdict(margin: float, sigma: float, sigma_threshold: float = SIGMA_THRESHOLD) -> str:
    """Classify a margin (positive = nonclassical side) given its uncertainty."""
    band = max(sigma_threshold * max(sigma, 0.0), MARGIN_EPS)
    if margin > band:
        return "nonclassical"
    if margin < -band:
        return "classical"
    return "indeterminate"


def _populations(rho) -> np.ndarray:
    if isinstance(rho, FockDensityMatrix):
        return rho.require_diagonal()
    return np.asarray(rho, dtype=float)


def linear_sigma(gradient, covariance) -> float:
    g = np.asarray(gradient, dtype=float)
    cov = np.asarray(covariance, dtype=float)[: g.size, : g.size]
    return float(np.sqrt(max(g @ cov @ g, 0.0)))


# -- Wigner function at the origin ------------------------------------------------


def wigner0_gradient(dim: int) -> np.ndarray:
    return TWO_OVER_PI * (-1.0) ** np.arange(dim)


def wigner0_sigma(covariance) -> float:
    """Uncertainty of W(0) propagated from a population covariance matrix."""
    return linear_sigma(wigner0_gradient(np.shape(covariance)[0]), covariance)


def wigner0_test(rho: FockDensityMatrix, sigma: float = 0.0, sigma_threshold: float = SIGMA_THRESHOLD) -> CriterionReport:
    """Negativity of the Wigner function at the origin."""
    if sigma < 0:
        raise DomainError("sigma must be >= 0")
    value = wigner_origin(rho)
    return CriterionReport("wigner0", value, float(sigma), verdict(-value, sigma, sigma_threshold), {"margin": -value})


# -- Richter-Vogel -----------------------------------------------------------------


def _rv_verdict(margins, sigmas, sigma_threshold):
    margins = np.asarray(margins)
    sigmas = np.asarray(sigmas)
    band = np.maximum(sigma_threshold * sigmas, MARGIN_EPS)
    if np.any(margins > band):
        return "nonclassical"
    if np.all((margins < -band) | ((margins <= MARGIN_EPS) & (sigmas == 0))):
        return "classical"
    return "indeterminate"


def _same_grid(a: CharacteristicCurve, b: CharacteristicCurve) -> None:
    if a.k_values.shape != b.k_values.shape or np.any(np.abs(a.k_values - b.k_values) > 1e-12):
        raise GridCoverageError("state and vacuum curves must share the same k grid")


def rv_first_order(g: CharacteristicCurve, g_vac: CharacteristicCurve, sigma_threshold: float = SIGMA_THRESHOLD) -> CriterionReport:
    """First-order test: nonclassical if ``|G(k)| > G_vac(k)`` for some k."""
    _same_grid(g, g_vac)
    margins = np.abs(g.g_values) - g_vac.g_values
    sigmas = np.hypot(g.std_errors, g_vac.std_errors)
    i = int(np.argmax(margins))
    details = {"margin": float(margins[i]), "k_at_max": float(g.k_values[i])}
    if g.imag_values is not None:
        details["abs_complex_g_at_max"] = float(np.hypot(g.g_values[i], g.imag_values[i]))
    details["max_z"] = _max_z(margins, sigmas)
    return CriterionReport("rv1", float(margins[i]), float(sigmas[i]), _rv_verdict(margins, sigmas, sigma_threshold), details)


def rv_second_order_margins(g: CharacteristicCurve, g_vac: CharacteristicCurve, k_values=None):
    """Margins ``2 G(k/2)^2 G_vac(k/sqrt2) - G(k) - G_vac(k)`` and their propagated errors."""
    k = g.k_values if k_values is None else np.asarray(k_values, dtype=float)
    gk, sk = g.at(k)
    gh, sh = g.at(k / 2.0)
    vk, svk = g_vac.at(k)
    vr, svr = g_vac.at(k / np.sqrt(2.0))
    margins = 2.0 * gh**2 * vr - gk - vk
    var = (4.0 * gh * vr * sh) ** 2 + sk**2 + (2.0 * gh**2 * svr) ** 2 + svk**2
    return k, margins, np.sqrt(var)


def _on_grid(grid: np.ndarray, k: np.ndarray) -> np.ndarray:
    idx = np.clip(np.searchsorted(grid, k - 1e-12), 0, grid.size - 1)
    return np.abs(grid[idx] - k) < 1e-9


def rv_second_order(g: CharacteristicCurve, g_vac: CharacteristicCurve, sigma_threshold: float = SIGMA_THRESHOLD) -> CriterionReport:
    """Second-order test built from ``G(k)``, ``G(k/2)`` and the vacuum curve.

    The test is evaluated at those k of ``g``'s grid whose half (and ``k/sqrt2``
    on the vacuum grid) are tabulated exactly; if there are none beyond k = 0,
    missing points are interpolated.
    """
    if g.k_values.max() > g_vac.k_values.max() + 1e-12:
        raise GridCoverageError("vacuum curve must cover the state's k range")
    k = g.k_values
    exact = _on_grid(g.k_values, k / 2.0) & _on_grid(g_vac.k_values, k) & _on_grid(g_vac.k_values, k / np.sqrt(2.0))
    if np.count_nonzero(exact & (k > 0)) > 0:
        k = k[exact]
    k, margins, sigmas = rv_second_order_margins(g, g_vac, k)
    i = int(np.argmax(margins))
    details = {"margin": float(margins[i]), "k_at_max": float(k[i]), "max_z": _max_z(margins, sigmas)}
    return CriterionReport("rv2", float(margins[i]), float(sigmas[i]), _rv_verdict(margins, sigmas, sigma_threshold), details)


def _max_z(margins, sigmas) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sigmas > 0, margins / sigmas, np.where(margins > 0, np.inf, -np.inf))
    return float(np.max(z))


def rv_grid(k_values) -> np.ndarray:
    """k grid extended by the half-k points the second-order test needs."""
    k = np.asarray(k_values, dtype=float)
    return np.unique(np.round(np.concatenate([k, k / 2.0, k / np.sqrt(2.0)]), 12))


# -- Klyshko -----------------------------------------------------------------------


def klyshko_values(populations) -> np.ndarray:
    """``B(n) = (n+2) p_n p_{n+2} - (n+1) p_{n+1}^2`` for every admissible n."""
    p = np.asarray(populations, dtype=float)
    n = np.arange(p.size - 2)
    return (n + 2) * p[:-2] * p[2:] - (n + 1) * p[1:-1] ** 2


def klyshko_gradient(populations, n: int) -> np.ndarray:
    p = np.asarray(populations, dtype=float)
    g = np.zeros(p.size)
    g[n] += (n + 2) * p[n + 2]
    g[n + 2] += (n + 2) * p[n]
    g[n + 1] -= 2 * (n + 1) * p[n + 1]
    return g


def klyshko_B(
    rho,
    n: int = 0,
    population_sigmas=None,
    sigma_threshold: float = SIGMA_THRESHOLD,
    covariance=None,
) -> CriterionReport:
    """Klyshko's photon-number modulation test ``B(n) < 0``.

    Errors come from ``covariance`` when given, otherwise from independent
    ``population_sigmas``.
    """
    p = _populations(rho)
    if not 0 <= n or n + 2 >= p.size:
        raise InvalidDimensionError(f"B({n}) needs populations up to index {n + 2}, have {p.size}")
    value = float(klyshko_values(p)[n])
    grad = klyshko_gradient(p, n)
    if covariance is not None:
        sigma = linear_sigma(grad, covariance)
    elif population_sigmas is not None:
        s = np.asarray(population_sigmas, dtype=float)[: p.size]
        sigma = float(np.sqrt(np.sum((grad[: s.size] * s) ** 2)))
    else:
        sigma = 0.0
    return CriterionReport("klyshko", value, sigma, verdict(-value, sigma, sigma_threshold), {"n": n, "margin": -value})


# -- Entanglement potential --------------------------------------------------------


def _split_amplitudes(nmax: int) -> np.ndarray:
    """``c[n, k] = sqrt(C(n, k) / 2^n)`` (zero for k > n)."""
    n = np.arange(nmax + 1)[:, None]
    k = np.arange(nmax + 1)[None, :]
    nn, kk = np.broadcast_arrays(n, k)
    out = np.zeros((nmax + 1, nmax + 1))
    ok = kk <= nn
    logc = gammaln(nn[ok] + 1) - gammaln(kk[ok] + 1) - gammaln(nn[ok] - kk[ok] + 1)
    out[ok] = np.exp(0.5 * (logc - nn[ok] * np.log(2.0)))
    return out


def beamsplitter_with_vacuum(rho, dim_out: int | None = None) -> TwoModeDensityMatrix:
    """Two-mode output of a 50-50 beam splitter fed with ``rho`` and vacuum.

    Each Fock component ``|n>`` maps to ``2^{-n/2} sum_k sqrt(C(n,k)) |k>|n-k>``
    (positive amplitudes).
    """
    p = _populations(rho)
    dim_out = p.size if dim_out is None else int(dim_out)
    if dim_out < p.size:
        raise InvalidDimensionError(f"dim_out={dim_out} cannot hold input dimension {p.size}")
    if dim_out**2 > MAX_TWO_MODE_DIM:
        raise InvalidDimensionError(f"two-mode space {dim_out}^2 exceeds the supported size")
    c = _split_amplitudes(p.size - 1)
    out = np.zeros((dim_out * dim_out, dim_out * dim_out))
    for n, pn in enumerate(p):
        if pn == 0:
            continue
        k = np.arange(n + 1)
        chi = np.zeros(dim_out * dim_out)
        chi[k * dim_out + (n - k)] = c[n, : n + 1]
        out += pn * np.outer(chi, chi)
    return TwoModeDensityMatrix(out)


def _pt_blocks(p: np.ndarray, dim_out: int):
    """Blocks of the partial transpose of the beam-splitter output, one per ``n_B - n_A``.

    Yields ``(rows, n_index, coeff, matrix)`` with matrix[a, c] =
    p[a + c + delta] * amp(a) * amp(c).
    """
    nmax = p.size - 1
    c = _split_amplitudes(2 * dim_out)
    for delta in range(-(dim_out - 1), dim_out):
        a = np.arange(max(0, -delta), min(dim_out, dim_out - delta))
        n = a[:, None] + a[None, :] + delta
        valid = (n >= 0) & (n <= nmax)
        nc = np.clip(n, 0, nmax)
        coeff = np.where(valid, c[np.clip(n, 0, 2 * dim_out), a[None, :]] * c[np.clip(n, 0, 2 * dim_out), a[:, None]], 0.0)
        yield nc, valid, coeff, np.where(valid, p[nc], 0.0) * coeff


def entanglement_potential_value(populations, dim_out: int | None = None, gradient: bool = False):
    """Log-negativity of the beam-splitter output, using the block structure.

    With ``gradient=True`` also returns the derivative with respect to each
    population (exact, from first-order eigenvalue perturbation).
    """
    p = np.asarray(populations, dtype=float)
    dim_out = p.size if dim_out is None else dim_out
    norm = 0.0
    grad = np.zeros(p.size)
    for nc, valid, coeff, block in _pt_blocks(p, dim_out):
        if not np.any(block):
            continue
        if gradient:
            w, v = np.linalg.eigh(block)
            norm += np.abs(w).sum()
            q = (v * np.sign(w)) @ v.T
            np.add.at(grad, nc[valid], (q * coeff)[valid])
        else:
            norm += np.abs(np.linalg.eigvalsh(block)).sum()
    value = max(float(np.log2(norm)), 0.0)
    if gradient:
        return value, grad / (norm * np.log(2.0))
    return value


def entanglement_potential(
    rho,
    sigma: float = 0.0,
    sigma_threshold: float = SIGMA_THRESHOLD,
    dim_out: int | None = None,
    method: str = "auto",
) -> CriterionReport:
    """Entanglement generated by mixing the state with vacuum on a 50-50 beam splitter.

    ``method="full"`` builds the two-mode density matrix and diagonalizes its
    partial transpose; ``method="blocks"`` exploits the block structure and is
    much faster for large truncations. ``"auto"`` picks ``"full"`` while the
    two-mode space stays within the supported size.
    """
    if isinstance(rho, FockDensityMatrix) and rho.tail_mass_bound >= TAIL_LIMIT:
        raise TruncationError(f"state truncation discards {rho.tail_mass_bound:.2g} probability; enlarge dim")
    p = _populations(rho)
    if method == "auto":
        method = "full" if (dim_out or p.size) ** 2 <= MAX_TWO_MODE_DIM else "blocks"
    if method == "full":
        value = log_negativity(beamsplitter_with_vacuum(p, dim_out))
    elif method == "blocks":
        value = entanglement_potential_value(p, dim_out)
    else:
        raise DomainError(f"unknown method {method!r}")
    return CriterionReport("ep", value, float(sigma), verdict(value, sigma, sigma_threshold), {"margin": value, "dim_out": dim_out or p.size})


def ep_sigma(covariance, populations, dim_out: int | None = None) -> float:
    """Linearized EP uncertainty from a population covariance."""
    _, grad = entanglement_potential_value(populations, dim_out, gradient=True)
    return linear_sigma(grad, covariance)


# -- Bootstrap ---------------------------------------------------------------------


def max_workers() -> int:
    env = os.environ.get("SPATS_LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def bootstrap_estimates(
    ds: QuadratureDataset,
    resamples: int = 100,
    seed: int = 0,
    dim: int = 25,
    bin_width: float = 0.005,
    tol: float = 1e-9,
    max_iter: int = 5000,
    initial=None,
) -> list[DiagonalEstimate]:
    """Nonparametric bootstrap: resample the quadratures with replacement and reconstruct each time.

    Resampling is done on the binned histogram (multinomial on bin counts), which
    is equivalent to resampling individual outcomes before binning.
    """
    from .tomography import _rebin

    centers, counts = _rebin(ds.samples, np.ones(ds.count), bin_width)
    probs = counts / counts.sum()
    seeds = np.random.SeedSequence(seed).spawn(resamples)
    if initial is not None:
        initial = 0.9 * np.asarray(initial, dtype=float) + 0.1 / dim

    def one(ss):
        w = np.random.default_rng(ss).multinomial(ds.count, probs).astype(float)
        return maxlik_diagonal(centers, dim=dim, tol=tol, max_iter=max_iter, weights=w, initial=initial)

    workers = min(max_workers(), resamples)
    if workers <= 1:
        return [one(s) for s in seeds]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(one, seeds))


def bootstrap_sigma(ds: QuadratureDataset, functional, **kwargs) -> float:
    """Standard deviation of ``functional(populations)`` over bootstrap reconstructions."""
    ests = bootstrap_estimates(ds, **kwargs)
    vals = np.array([functional(e.probabilities) for e in ests])
    return float(vals.std(ddof=1))
