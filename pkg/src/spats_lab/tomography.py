"""Maximum-likelihood reconstruction of photon-number populations from homodyne data.

The phase-averaged likelihood only depends on the diagonal of the density
matrix; each outcome ``x`` contributes ``sum_n p_n psi_n(x)^2``. Populations are
found with the expectation-maximization fixed point, which keeps them on the
probability simplex and never decreases the likelihood.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DatasetError, DomainError
from .homodyne import QuadratureDataset, hermite_functions

log = logging.getLogger(__name__)

DEFAULT_DIM = 25
DENSITY_FLOOR = 1e-300
FISHER_RIDGE = 1e-10
ACTIVE_FLOOR = 1e-6


def kernel_matrix(samples: np.ndarray, dim: int) -> np.ndarray:
    """``F[j, n] = psi_n(x_j)^2``, shape ``(len(samples), dim)``."""
    return np.ascontiguousarray((hermite_functions(dim - 1, np.asarray(samples, dtype=float)) ** 2).T)


def bin_samples(samples: np.ndarray, width: float) -> tuple[np.ndarray, np.ndarray]:
    """Histogram samples into bins of ``width``; returns occupied bin centers and counts."""
    idx = np.floor(np.asarray(samples) / width).astype(np.int64)
    uniq, counts = np.unique(idx, return_counts=True)
    return (uniq + 0.5) * width, counts.astype(float)


@dataclass
class DiagonalEstimate:
    probabilities: np.ndarray
    std_errors: np.ndarray
    loglik_trace: list[float]
    iterations: int
    converged: bool
    covariance: np.ndarray | None = field(default=None, repr=False)
    fisher_regularized: bool = False
    density_floored: bool = False

    @property
    def dim(self) -> int:
        return self.probabilities.size

    @property
    def loglik_final(self) -> float:
        return self.loglik_trace[-1] if self.loglik_trace else float("nan")

    def to_json(self) -> dict:
        return {
            "probabilities": [float(v) for v in self.probabilities],
            "std_errors": [float(v) for v in self.std_errors],
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "loglik_final": float(self.loglik_final),
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "DiagonalEstimate":
        try:
            with open(path) as fh:
                d = json.load(fh)
            p = np.array(d["probabilities"], dtype=float)
            err = np.array(d["std_errors"], dtype=float)
        except (OSError, KeyError, ValueError, TypeError) as exc:
            raise DatasetError(f"cannot read estimate {path}: {exc}") from None
        return cls(p, err, [float(d.get("loglik_final", "nan"))], int(d.get("iterations", 0)), bool(d.get("converged", False)))


def _weighted(ds_or_samples, weights=None) -> tuple[np.ndarray, np.ndarray]:
    samples = ds_or_samples.samples if isinstance(ds_or_samples, QuadratureDataset) else np.asarray(ds_or_samples)
    if weights is None:
        weights = np.ones(samples.size)
    return samples, np.asarray(weights, dtype=float)


def likelihood(probabilities, ds, weights=None, kernel=None) -> float:
    """Log-likelihood ``sum_j w_j log(sum_n p_n psi_n(x_j)^2)``."""
    p = np.asarray(probabilities, dtype=float)
    if np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-9:
        raise DomainError("probabilities must lie on the simplex")
    samples, w = _weighted(ds, weights)
    F = kernel_matrix(samples, p.size) if kernel is None else kernel
    dens = F @ p
    floored = dens < DENSITY_FLOOR
    if np.any(floored):
        log.warning("likelihood: %d sample densities floored at %g", int(floored.sum()), DENSITY_FLOOR)
    return float(w @ np.log(np.maximum(dens, DENSITY_FLOOR)))


def fisher_information(probabilities, kernel: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Observed Fisher matrix ``I_mn = sum_j w_j F_jm F_jn / p(x_j)^2``."""
    dens = np.maximum(kernel @ probabilities, DENSITY_FLOOR)
    scaled = kernel * (np.sqrt(weights) / dens)[:, None]
    return scaled.T @ scaled


def simplex_covariance(fisher: np.ndarray, eliminate: int | None = None) -> tuple[np.ndarray, bool]:
    """Covariance of all coordinates from a Fisher matrix under ``sum p = 1``.

    One coordinate (by default the last) is expressed through the others; the
    reduced Fisher matrix is inverted and mapped back with the Jacobian.
    """
    D = fisher.shape[0]
    k = D - 1 if eliminate is None else eliminate
    free = [i for i in range(D) if i != k]
    J = np.zeros((D, D - 1))
    J[free, np.arange(D - 1)] = 1.0
    J[k, :] = -1.0
    reduced = J.T @ fisher @ J
    regularized = False
    try:
        cond = np.linalg.cond(reduced)
        if not np.isfinite(cond) or cond > 1e14:
            raise np.linalg.LinAlgError
        inv = np.linalg.inv(reduced)
    except np.linalg.LinAlgError:
        regularized = True
        inv = np.linalg.inv(reduced + FISHER_RIDGE * np.eye(D - 1))
    cov = J @ inv @ J.T
    return 0.5 * (cov + cov.T), regularized


def constrained_covariance(probabilities, fisher: np.ndarray) -> tuple[np.ndarray, bool]:
    """Population covariance from the Fisher matrix, respecting positivity and normalization.

    Populations that the estimate has pushed onto the boundary (below
    ``ACTIVE_FLOOR``) are active positivity constraints: they are held fixed and
    the covariance is formed on the remaining face of the simplex. Boundary
    coordinates get the conditional error ``1 / sqrt(I_nn)`` and no correlations.
    """
    p = np.asarray(probabilities, dtype=float)
    active = np.flatnonzero(p > ACTIVE_FLOOR)
    D = p.size
    cov = np.zeros((D, D))
    regularized = False
    if active.size >= 2:
        sub, regularized = simplex_covariance(fisher[np.ix_(active, active)])
        cov[np.ix_(active, active)] = sub
    boundary = np.setdiff1d(np.arange(D), active)
    diag = np.maximum(fisher.diagonal()[boundary], FISHER_RIDGE)
    cov[boundary, boundary] = 1.0 / diag
    return cov, regularized


def fisher_errors(estimate: DiagonalEstimate, ds, weights=None, kernel=None) -> np.ndarray:
    """Fisher-information standard errors of the reconstructed populations.

    Also stores the full covariance on ``estimate.covariance`` for error
    propagation into derived indicators.
    """
    samples, w = _weighted(ds, weights)
    F = kernel_matrix(samples, estimate.dim) if kernel is None else kernel
    cov, reg = constrained_covariance(estimate.probabilities, fisher_information(estimate.probabilities, F, w))
    estimate.covariance = cov
    estimate.fisher_regularized = reg
    return np.sqrt(np.clip(cov.diagonal(), 0.0, None))


def maxlik_diagonal(
    ds,
    dim: int = DEFAULT_DIM,
    tol: float = 1e-9,
    max_iter: int = 5000,
    weights=None,
    bin_width: float | None = None,
    initial=None,
    callback=None,
) -> DiagonalEstimate:
    """Reconstruct populations ``p_0 .. p_{dim-1}`` by EM iteration.

    Parameters
    ----------
    ds : QuadratureDataset or array of samples
    dim : number of populations kept (the truncation).
    tol : stop when the largest population change in one step drops below it.
    weights : optional per-sample multiplicities (bootstrap resamples).
    bin_width : if given, samples are first histogrammed into bins of this width
        and the bin centers are used as weighted outcomes. This makes repeated
        reconstructions much cheaper at a negligible likelihood change.
    initial : starting populations; uniform by default.
    callback : called as ``callback(iteration, populations)`` after every update.
    """
    samples, w = _weighted(ds, weights)
    if not np.all(np.isfinite(samples)):
        raise DatasetError("non-finite samples")
    total = w.sum()
    if total < 10 * dim:
        raise DatasetError(f"need at least {10 * dim} samples for a {dim}-level reconstruction, got {total:g}")
    if bin_width is not None:
        samples, w = _rebin(samples, w, bin_width)
    keep = w > 0
    samples, w = samples[keep], w[keep]
    F = kernel_matrix(samples, dim)
    wn = w / total

    p = np.full(dim, 1.0 / dim) if initial is None else np.asarray(initial, dtype=float).copy()
    trace = []
    converged = False
    it = 0
    dens = F @ p
    while it < max_iter:
        trace.append(float(w @ np.log(np.maximum(dens, DENSITY_FLOOR))))
        new = p * (F.T @ (wn / np.maximum(dens, DENSITY_FLOOR)))
        new /= new.sum()
        step = np.max(np.abs(new - p))
        p = new
        it += 1
        if callback is not None:
            callback(it, p)
        dens = F @ p
        if step < tol:
            converged = True
            break
    trace.append(float(w @ np.log(np.maximum(dens, DENSITY_FLOOR))))
    est = DiagonalEstimate(p, np.zeros(dim), trace, it, converged, density_floored=bool(np.any(dens < DENSITY_FLOOR)))
    est.std_errors = fisher_errors(est, samples, w, kernel=F)
    if not converged:
        log.info("maxlik_diagonal: no convergence after %d iterations (last step %.3g)", it, step)
    return est


def _rebin(samples, weights, width):
    idx = np.floor(samples / width).astype(np.int64)
    uniq, inv = np.unique(idx, return_inverse=True)
    counts = np.bincount(inv, weights=weights)
    return (uniq + 0.5) * width, counts
