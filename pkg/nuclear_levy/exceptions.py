"""Custom exceptions for the nuclear_levy library."""


class LevyException(Exception):
    """Base exception for nuclear_levy library."""

    pass


class DimensionError(LevyException):
    """Vectors or matrices disagree on the truncation dimension."""

    pass


class OrderingError(LevyException):
    """Seminorm indices are not in the required order."""

    pass


class InvalidMeasureError(LevyException):
    """Levy measure violates a structural condition (e.g. mass at the origin)."""

    pass


class InvalidParameterError(LevyException):
    """Invalid parameter value."""

    pass


class DomainError(InvalidParameterError):
    """Argument outside the domain of an operation (negative time, n=0 roots)."""

    pass


class MatrixError(InvalidParameterError):
    """Covariance matrix cannot be factorized within the PSD tolerance."""

    pass


class InfiniteMassError(LevyException):
    """Region is not bounded below and carries infinite mass."""

    pass


class NonIntegrableError(LevyException):
    """A required moment integral diverges."""

    pass


class EmptyRegionError(LevyException):
    """Sampling requested from a region of zero mass."""

    pass


class ConfigError(LevyException):
    """Configuration file is malformed or has unknown keys."""

    pass
