"""Exception types raised across the package."""


class SpatsError(ValueError):
    """Base class for all domain errors raised by spats_lab."""


class InvalidDimensionError(SpatsError):
    pass


class DomainError(SpatsError):
    """A parameter lies outside its physical domain (negative nbar, eta > 1, ...)."""


class TruncationError(SpatsError):
    """The truncated Fock space cannot represent the requested result."""


class UnsupportedInputError(SpatsError):
    """Input is valid physics but outside what this toolkit supports (e.g. non-diagonal states)."""


class ContractViolation(SpatsError):
    pass


class GridCoverageError(SpatsError):
    pass


class DatasetError(SpatsError):
    """Quadrature data is missing, malformed or too small."""
