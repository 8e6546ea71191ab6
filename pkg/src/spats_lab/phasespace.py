"""P and Wigner functions of photon-added thermal states.

Phase-space points are complex ``alpha = x + i y``; scalars and numpy arrays
are both accepted and the result has the shape of ``alpha``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .fock import FockDensityMatrix
from .states import _check_eta, _check_nbar

TWO_OVER_PI = 2.0 / np.pi
DEFAULT_GRID = np.linspace(-3.0, 3.0, 121)


def _abs2(alpha) -> np.ndarray:
    return np.abs(np.asarray(alpha, dtype=complex)) ** 2


def _scalar(out):
    return float(out) if np.ndim(out) == 0 else out


def p_function_spats(nbar: float, alpha):
    """Glauber-Sudarshan P function; regular for every ``nbar > 0``."""
    nbar = float(nbar)
    if not nbar > 0:
        raise DomainError(f"P function is singular for nbar <= 0 (got {nbar})")
    r2 = _abs2(alpha)
    out = ((1 + nbar) * r2 - nbar) * np.exp(-r2 / nbar) / (np.pi * nbar**3)
    return _scalar(out)


def wigner_spats_ideal(nbar: float, alpha):
    nbar = _check_nbar(nbar)
    r2 = _abs2(alpha)
    s = 1.0 + 2.0 * nbar
    out = TWO_OVER_PI * (4.0 * r2 * (1.0 + nbar) - s) / s**3 * np.exp(-2.0 * r2 / s)
    return _scalar(out)


def wigner_spats_lossy(nbar: float, eta: float, alpha):
    """Wigner function after a loss channel of efficiency ``eta``."""
    nbar = _check_nbar(nbar)
    eta = _check_eta(eta)
    r2 = _abs2(alpha)
    s = 1.0 + 2.0 * nbar * eta
    num = 1.0 + 2.0 * eta * (nbar + 2.0 * (1.0 + nbar) * r2 - 2.0 * nbar * eta - 1.0)
    out = TWO_OVER_PI * num / s**3 * np.exp(-2.0 * r2 / s)
    return _scalar(out)


def laguerre_series(coeffs: np.ndarray, z) -> np.ndarray:
    """``sum_n c_n L_n(z)`` by the three-term recurrence."""
    z = np.asarray(z, dtype=float)
    coeffs = np.asarray(coeffs, dtype=float)
    total = coeffs[0] * np.ones_like(z)
    if coeffs.size == 1:
        return total
    l_prev = np.ones_like(z)
    l_cur = 1.0 - z
    total = total + coeffs[1] * l_cur
    for n in range(1, coeffs.size - 1):
        l_prev, l_cur = l_cur, ((2 * n + 1 - z) * l_cur - n * l_prev) / (n + 1)
        total = total + coeffs[n + 1] * l_cur
    return total


def wigner_from_diagonal(rho: FockDensityMatrix, alpha):
    """Wigner function of a diagonal state from its populations (Laguerre series)."""
    p = rho.require_diagonal()
    r2 = _abs2(alpha)
    signs = (-1.0) ** np.arange(p.size)
    out = TWO_OVER_PI * np.exp(-2.0 * r2) * laguerre_series(signs * p, 4.0 * r2)
    return _scalar(out)


def wigner_origin(rho: FockDensityMatrix) -> float:
    """``W(0) = (2/pi) <(-1)^n>``."""
    p = rho.require_diagonal()
    return float(TWO_OVER_PI * (((-1.0) ** np.arange(p.size)) @ p))


@dataclass(frozen=True)
class PhaseSpaceGrid:
    x_values: np.ndarray
    y_values: np.ndarray
    values: np.ndarray  # values[i, j] at alpha = x_values[i] + 1j * y_values[j]

    def __post_init__(self):
        for axis in (self.x_values, self.y_values):
            if np.any(np.diff(axis) <= 0):
                raise DomainError("grid axes must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("grid values must be finite")

    def to_csv(self, path) -> None:
        """Write ``x,y,w`` rows, x-major, 9 significant digits."""
        with open(path, "w") as fh:
            fh.write("x,y,w\n")
            for i, x in enumerate(self.x_values):
                for j, y in enumerate(self.y_values):
                    fh.write(f"{x:.9g},{y:.9g},{self.values[i, j]:.9g}\n")


def evaluate_grid(func, x_values=DEFAULT_GRID, y_values=DEFAULT_GRID) -> PhaseSpaceGrid:
    """Tabulate ``func(alpha)`` (vectorized) on a rectangular grid."""
    x = np.asarray(x_values, dtype=float)
    y = np.asarray(y_values, dtype=float)
    alpha = x[:, None] + 1j * y[None, :]
    return PhaseSpaceGrid(x, y, np.asarray(func(alpha), dtype=float))


def wigner_grid(rho: FockDensityMatrix, x_values=DEFAULT_GRID, y_values=DEFAULT_GRID) -> PhaseSpaceGrid:
    return evaluate_grid(lambda a: wigner_from_diagonal(rho, a), x_values, y_values)
