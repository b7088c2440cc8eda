"""Exception hierarchy.

Each class maps onto one CLI exit code, so callers can tell bad input apart
from a violated solvability hypothesis or a numerical breakdown.
"""


class FrozenStarError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class InputError(FrozenStarError, ValueError):
    """Malformed configuration, arguments out of range, too few eigenvalues."""

    exit_code = 2


class AssumptionViolation(FrozenStarError):
    """A hypothesis of the uniqueness theorem fails numerically.

    ``details`` carries machine-readable context (offending indices,
    skipped Fourier modes, ...) for the diagnostics report.
    """

    exit_code = 3

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class NumericError(FrozenStarError, ArithmeticError):
    """Integrator, eigensolver or classification breakdown."""

    exit_code = 4


class ResolutionError(NumericError):
    """The potential grid is too coarse for the requested spectral parameter."""


class ClassificationError(NumericError):
    """Roots could not be split into the asymptotic branches."""
