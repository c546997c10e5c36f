"""Exception and warning types shared across the package."""


class ConicError(Exception):
    """Base class for errors raised by conic_fourier."""

    exit_code = 4


class ParameterError(ConicError, ValueError):
    """Invalid Jacobi, weight or dimension parameters."""

    exit_code = 2


class DomainError(ConicError, ValueError):
    """An argument lies outside the domain of the operation."""

    exit_code = 2


class ResolutionError(ConicError):
    """A discretization is too coarse for the requested quantity."""

    exit_code = 3


class NumericError(ConicError, ArithmeticError):
    """Eigensolver failure, overflow, or another numeric breakdown."""

    exit_code = 4


class ConfigError(ConicError):
    exit_code = 2


class ResolutionWarning(UserWarning):
    """Refinement moved a result by more than the requested tolerance."""
