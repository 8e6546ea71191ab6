"""Truncated Fock-space linear algebra.

Single-mode states live on the basis ``|0>, ..., |dim-1>``. Two-mode states use
the composite index ``i = m * dim + n`` for ``|m>_A |n>_B``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, InvalidDimensionError, UnsupportedInputError

HERMITIAN_TOL = 1e-10
POSITIVITY_TOL = -1e-10
DIAGONAL_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FockDensityMatrix:
    """Single-mode density operator on a truncated Fock space.

    ``tail_mass_bound`` is an upper bound on the probability that was cut away
    by the truncation before renormalization.
    """

    elements: np.ndarray
    tail_mass_bound: float = 0.0
    dim: int = field(init=False)

    def __post_init__(self):
        m = np.asarray(self.elements)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidDimensionError(f"density matrix must be square, got shape {m.shape}")
        if m.shape[0] < 1:
            raise InvalidDimensionError("empty density matrix")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-12:
            raise ContractViolation("density matrix is not Hermitian")
        # store the exactly Hermitian part
        m = 0.5 * (m + m.conj().T)
        object.__setattr__(self, "elements", _frozen(m))
        object.__setattr__(self, "dim", m.shape[0])

    @classmethod
    def from_populations(cls, populations, tail_mass_bound: float = 0.0) -> "FockDensityMatrix":
        return cls(np.diag(np.asarray(populations, dtype=float)), tail_mass_bound)

    @property
    def populations(self) -> np.ndarray:
        """Photon-number distribution ``<n|rho|n>``."""
        return self.elements.diagonal().real.copy()

    @property
    def trace(self) -> float:
        return float(self.elements.diagonal().real.sum())

    def is_diagonal(self, tol: float = DIAGONAL_TOL) -> bool:
        off = self.elements - np.diag(self.elements.diagonal())
        return bool(np.max(np.abs(off), initial=0.0) < tol)

    def require_diagonal(self) -> np.ndarray:
        """Return the populations, raising if the state has coherences."""
        if not self.is_diagonal():
            raise UnsupportedInputError("only phase-independent (diagonal) states are supported")
        return self.populations

    def mean_photon_number(self) -> float:
        return float(np.arange(self.dim) @ self.populations)

    def eigenvalues(self) -> np.ndarray:
        return eigenvalues_hermitian(self.elements)

    def is_physical(self, tol: float = 1e-9) -> bool:
        return abs(self.trace - 1.0) < tol and self.eigenvalues()[-1] >= POSITIVITY_TOL

    def truncated(self, dim: int) -> "FockDensityMatrix":
        """Project onto the first ``dim`` basis states and renormalize."""
        if dim >= self.dim:
            return self.padded(dim)
        kept = self.elements[:dim, :dim]
        lost = self.trace - float(kept.diagonal().real.sum())
        return FockDensityMatrix(kept / kept.diagonal().real.sum(), self.tail_mass_bound + max(lost, 0.0))

    def padded(self, dim: int) -> "FockDensityMatrix":
        """Embed into a larger Fock space with zeros in the new rows/columns."""
        if dim < self.dim:
            return self.truncated(dim)
        out = np.zeros((dim, dim), dtype=complex)
        out[: self.dim, : self.dim] = self.elements
        return FockDensityMatrix(out, self.tail_mass_bound)


@dataclass(frozen=True)
class TwoModeDensityMatrix:
    """Bipartite density operator, composite index ``m * dim_per_mode + n``."""

    elements: np.ndarray
    dim_per_mode: int = field(init=False)

    def __post_init__(self):
        m = np.asarray(self.elements)
        d = int(round(np.sqrt(m.shape[0])))
        if m.ndim != 2 or m.shape[0] != m.shape[1] or d * d != m.shape[0]:
            raise InvalidDimensionError(f"two-mode matrix must be (d^2, d^2), got {m.shape}")
        object.__setattr__(self, "elements", _frozen(m))
        object.__setattr__(self, "dim_per_mode", d)

    @property
    def trace(self) -> float:
        return float(self.elements.diagonal().real.sum())

    def reduced(self, mode: int) -> np.ndarray:
        """Reduced density matrix of mode 0 (A) or 1 (B)."""
        d = self.dim_per_mode
        t = self.elements.reshape(d, d, d, d)
        if mode == 0:
            return np.einsum("anbn->ab", t)
        return np.einsum("mamb->ab", t)


def annihilation_matrix(dim: int) -> np.ndarray:
    """Matrix of the lowering operator, entry ``(n-1, n) = sqrt(n)``."""
    if dim < 2:
        raise InvalidDimensionError(f"dim must be >= 2, got {dim}")
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def creation_matrix(dim: int) -> np.ndarray:
    return annihilation_matrix(dim).conj().T


def number_matrix(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def partial_transpose(rho2: TwoModeDensityMatrix | np.ndarray) -> np.ndarray:
    """Transpose on mode A: ``out[(m,n),(m',n')] = in[(m',n),(m,n')]``."""
    if isinstance(rho2, TwoModeDensityMatrix):
        m, d = rho2.elements, rho2.dim_per_mode
    else:
        m = np.asarray(rho2)
        d = int(round(np.sqrt(m.shape[0])))
        if d * d != m.shape[0] or m.shape[0] != m.shape[1]:
            raise InvalidDimensionError(f"two-mode matrix must be (d^2, d^2), got {m.shape}")
    t = m.reshape(d, d, d, d)
    return np.ascontiguousarray(t.transpose(2, 1, 0, 3)).reshape(d * d, d * d)


def _check_hermitian(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ContractViolation(f"expected a square matrix, got shape {m.shape}")
    if m.size and np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
        raise ContractViolation("matrix is not Hermitian within tolerance")
    return m


def eigenvalues_hermitian(m: np.ndarray) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, in descending order."""
    m = _check_hermitian(m)
    return np.linalg.eigvalsh(m)[::-1]


def eigh_hermitian(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and matching eigenvector columns."""
    m = _check_hermitian(m)
    w, v = np.linalg.eigh(m)
    return w[::-1], v[:, ::-1]


def trace_norm(m: np.ndarray) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    m = _check_hermitian(m)
    if m.size == 0:
        return 0.0
    return float(np.abs(eigenvalues_hermitian(m)).sum())


def log_negativity(rho2: TwoModeDensityMatrix) -> float:
    """Base-2 logarithmic negativity of a bipartite state."""
    return max(float(np.log2(trace_norm(partial_transpose(rho2)))), 0.0)
