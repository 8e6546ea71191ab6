"""Classification maps over seed mean photon number and efficiency.

For every ``(nbar, eta)`` cell the model state is the photon-added thermal
state sent through the loss channel and truncated to the reconstruction
dimension. A cell is

* ``classical`` if the ideal indicator does not show nonclassicality,
* ``grey`` if it does, but by less than ``sigma_threshold`` reconstruction errors,
* ``black`` otherwise.

Noise models give the reconstruction error: :class:`FisherNoise` uses the
expected Fisher information of N homodyne samples (fast, analytic),
:class:`MonteCarloNoise` simulates and reconstructs repeatedly (reference), and
:class:`AveragedNoise` applies one error level per criterion, averaged over a
set of reference states.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .criteria import (
    MARGIN_EPS,
    SIGMA_THRESHOLD,
    entanglement_potential_value,
    ep_sigma,
    klyshko_gradient,
    klyshko_values,
    linear_sigma,
    max_workers,
    wigner0_gradient,
)
from .errors import DomainError
from .homodyne import hermite_functions, quadrature_half_width, sample_quadratures
from .fock import FockDensityMatrix
from .states import _check_eta, _check_nbar, lossy_spats
from .tomography import constrained_covariance, maxlik_diagonal

log = logging.getLogger(__name__)

REGION_CRITERIA = ("wigner0", "klyshko", "ep")
LABELS = ("classical", "grey", "black")
MODEL_DIM = 80


def _check_criterion(criterion: str) -> str:
    if criterion not in REGION_CRITERIA:
        raise DomainError(
            f"region maps are defined for {', '.join(REGION_CRITERIA)} only; "
            f"{criterion!r} is not a reconstruction-based indicator"
        )
    return criterion


def model_populations(nbar: float, eta: float, dim: int) -> np.ndarray:
    """Lossy photon-added thermal populations truncated to ``dim`` levels."""
    _check_nbar(nbar)
    _check_eta(eta)
    big = max(MODEL_DIM, 2 * dim)
    p = lossy_spats(nbar, eta, big).populations[:dim]
    return p / p.sum()


def indicator(criterion: str, populations) -> float:
    """Signed nonclassicality margin: positive when the criterion's inequality holds."""
    p = np.asarray(populations, dtype=float)
    if criterion == "wigner0":
        return -float(wigner0_gradient(p.size) @ p)
    if criterion == "klyshko":
        return -float(klyshko_values(p)[0])
    if criterion == "ep":
        return entanglement_potential_value(p)
    raise DomainError(f"unknown criterion {criterion!r}")


def indicator_sigma(criterion: str, populations, covariance) -> float:
    p = np.asarray(populations, dtype=float)
    if criterion == "wigner0":
        return linear_sigma(wigner0_gradient(p.size), covariance)
    if criterion == "klyshko":
        return linear_sigma(klyshko_gradient(p, 0), covariance)
    if criterion == "ep":
        return ep_sigma(covariance, p)
    raise DomainError(f"unknown criterion {criterion!r}")


def expected_fisher(populations, count: int, points: int = 4001) -> np.ndarray:
    """Fisher information of ``count`` homodyne samples, ``N * int f_m f_n / p dx``."""
    p = np.asarray(populations, dtype=float)
    half = quadrature_half_width(p.size)
    x = np.linspace(-half, half, points)
    f = hermite_functions(p.size - 1, x) ** 2
    dens = np.maximum(p @ f, 1e-300)
    w = np.full(points, x[1] - x[0])
    w[[0, -1]] *= 0.5
    scaled = f * np.sqrt(w / dens)
    return count * (scaled @ scaled.T)


@dataclass(frozen=True)
class FisherNoise:
    """Cramer-Rao reconstruction errors for ``samples`` homodyne outcomes."""

    samples: int = 100_000
    dim: int = 25

    def sigma(self, criterion: str, nbar: float, eta: float) -> float:
        p = model_populations(nbar, eta, self.dim)
        cov, _ = constrained_covariance(p, expected_fisher(p, self.samples))
        return indicator_sigma(criterion, p, cov)

    def config(self) -> dict:
        return {"model": "fisher", "samples": self.samples, "dim": self.dim}


@dataclass(frozen=True)
class MonteCarloNoise:
    """Spread of the indicator over repeated simulate-and-reconstruct runs."""

    samples: int = 100_000
    resamples: int = 50
    dim: int = 25
    seed: int = 0
    bin_width: float = 0.005
    max_iter: int = 5000

    def sigma(self, criterion: str, nbar: float, eta: float, seed=None) -> float:
        return noise_sigma(criterion, nbar, eta, self.samples, self.resamples, self.dim,
                           self.seed if seed is None else seed, self.bin_width, self.max_iter)

    def config(self) -> dict:
        return {"model": "montecarlo", "samples": self.samples, "resamples": self.resamples,
                "dim": self.dim, "seed": self.seed, "bin_width": self.bin_width}


@lru_cache(maxsize=256)
def _mc_reconstructions(nbar, eta, N, resamples, dim, seed_key, bin_width, max_iter) -> tuple:
    seed = np.random.SeedSequence(list(seed_key)) if isinstance(seed_key, tuple) else np.random.SeedSequence(seed_key)
    rho = FockDensityMatrix.from_populations(model_populations(nbar, eta, MODEL_DIM))

    def one(ss):
        ds = sample_quadratures(rho, N, int(ss.generate_state(1)[0]))
        return maxlik_diagonal(ds, dim=dim, bin_width=bin_width, max_iter=max_iter).probabilities

    seeds = seed.spawn(resamples)
    workers = min(max_workers(), resamples)
    if workers <= 1:
        return tuple(one(s) for s in seeds)
    with ThreadPoolExecutor(workers) as pool:
        return tuple(pool.map(one, seeds))


def _seed_key(seed):
    if isinstance(seed, np.random.SeedSequence):
        ent = seed.entropy if isinstance(seed.entropy, int) else tuple(seed.entropy)
        return tuple(np.atleast_1d(ent).tolist()) + tuple(seed.spawn_key)
    return int(seed)


def noise_sigma(
    criterion: str,
    nbar: float,
    eta: float,
    N: int = 100_000,
    resamples: int = 50,
    dim: int = 25,
    seed=0,
    bin_width: float = 0.005,
    max_iter: int = 5000,
) -> float:
    """Monte Carlo standard deviation of a reconstructed indicator.

    Simulates ``resamples`` datasets of ``N`` outcomes from the model state,
    reconstructs each one and evaluates the criterion. Reconstructions are
    cached, so asking for several criteria at the same cell costs one run.
    """
    _check_criterion(criterion)
    if N < 1000:
        raise DomainError("noise_sigma needs N >= 1000")
    if resamples < 2:
        raise DomainError("need at least two resamples for a spread")
    recs = _mc_reconstructions(float(nbar), float(eta), int(N), int(resamples), int(dim), _seed_key(seed), bin_width, max_iter)
    vals = [indicator(criterion, p) for p in recs]
    return float(np.std(vals, ddof=1))


# seed mean photon numbers of the measured states, all at the fitted efficiency
EXPERIMENTAL_STATES = ((0.08, 0.62), (0.53, 0.62), (1.15, 0.62))


@dataclass(frozen=True)
class AveragedNoise:
    """A single error per criterion: the mean reconstruction error over reference states.

    This is how the grey zones are drawn when only the measured states' error
    bars are known: every cell gets the same noise level.
    """

    base: object = field(default_factory=lambda: MonteCarloNoise())
    reference_states: tuple = EXPERIMENTAL_STATES

    @property
    def dim(self):
        return self.base.dim

    def sigma(self, criterion: str, nbar: float, eta: float) -> float:
        return self.level(criterion)

    def level(self, criterion: str) -> float:
        return _averaged_level(self, criterion)

    def config(self) -> dict:
        return {"model": "averaged", "base": self.base.config(), "reference_states": [list(s) for s in self.reference_states]}


@lru_cache(maxsize=64)
def _averaged_level(noise: AveragedNoise, criterion: str) -> float:
    return float(np.mean([noise.base.sigma(criterion, nb, eta) for nb, eta in noise.reference_states]))


def classify_cell(nbar: float, eta: float, criterion: str, noise_model, sigma_threshold: float = SIGMA_THRESHOLD) -> str:
    """Label one parameter cell as classical, grey or black."""
    _check_criterion(criterion)
    _check_nbar(nbar)
    _check_eta(eta)
    ideal = indicator(criterion, model_populations(nbar, eta, getattr(noise_model, "dim", 25)))
    if ideal <= MARGIN_EPS:
        return "classical"
    sigma = noise_model.sigma(criterion, nbar, eta)
    return "grey" if ideal < sigma_threshold * sigma else "black"


@dataclass
class RegionMap:
    nbar_grid: np.ndarray
    eta_grid: np.ndarray
    labels: np.ndarray  # labels[i, j] for nbar_grid[i], eta_grid[j]
    criterion: str
    noise_config: dict = field(default_factory=dict)

    def label_at(self, nbar: float, eta: float) -> str:
        i = int(np.argmin(np.abs(self.nbar_grid - nbar)))
        j = int(np.argmin(np.abs(self.eta_grid - eta)))
        return str(self.labels[i, j])

    def black_boundary(self, eta: float) -> float:
        """Largest nbar labeled black in the column closest to ``eta`` (nan if none)."""
        j = int(np.argmin(np.abs(self.eta_grid - eta)))
        black = np.flatnonzero(self.labels[:, j] == "black")
        return float(self.nbar_grid[black.max()]) if black.size else float("nan")

    def to_csv(self, path) -> Path:
        """Write ``nbar,eta,label`` rows plus a JSON sidecar; returns the sidecar path."""
        path = Path(path)
        with open(path, "w") as fh:
            fh.write("nbar,eta,label\n")
            for i, nb in enumerate(self.nbar_grid):
                for j, eta in enumerate(self.eta_grid):
                    fh.write(f"{nb:.6g},{eta:.6g},{self.labels[i, j]}\n")
        side = path.with_suffix(".json")
        side.write_text(json.dumps({"criterion": self.criterion, "noise_config": self.noise_config}, indent=2) + "\n")
        return side


def region_map(
    criterion: str,
    noise_model=None,
    nbar_max: float = 4.0,
    nbar_steps: int = 21,
    eta_steps: int = 21,
    sigma_threshold: float = SIGMA_THRESHOLD,
    nbar_grid=None,
    eta_grid=None,
    progress=None,
) -> RegionMap:
    """Classify every cell of an ``(nbar, eta)`` grid.

    ``progress`` is called with ``(row_index, n_rows)`` after each nbar row.
    Monte Carlo noise models get a distinct seed per cell, derived from the
    model seed and the cell index.
    """
    _check_criterion(criterion)
    noise_model = FisherNoise() if noise_model is None else noise_model
    nb = np.linspace(0.0, nbar_max, nbar_steps) if nbar_grid is None else np.asarray(nbar_grid, dtype=float)
    et = np.linspace(0.0, 1.0, eta_steps) if eta_grid is None else np.asarray(eta_grid, dtype=float)
    if nb.size == 0 or et.size == 0:
        raise DomainError("grids must be non-empty")
    labels = np.empty((nb.size, et.size), dtype=object)
    for i, n in enumerate(nb):
        for j, e in enumerate(et):
            model = noise_model
            if isinstance(noise_model, MonteCarloNoise):
                cell_seed = np.random.SeedSequence([noise_model.seed, i * et.size + j])
                model = _SeededMC(noise_model, cell_seed)
            labels[i, j] = classify_cell(float(n), float(e), criterion, model, sigma_threshold)
        if progress is not None:
            progress(i, nb.size)
    config = dict(noise_model.config(), sigma_threshold=sigma_threshold)
    return RegionMap(nb, et, labels, criterion, config)


@dataclass(frozen=True)
class _SeededMC:
    base: MonteCarloNoise
    seed: np.random.SeedSequence

    @property
    def dim(self):
        return self.base.dim

    def sigma(self, criterion, nbar, eta):
        return self.base.sigma(criterion, nbar, eta, seed=self.seed)
