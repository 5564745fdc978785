"""
Errors - Exception and warning hierarchy for the numerical core
"""
from typing import Optional


class SpectralError(Exception):
    """Base class for every error raised by the core modules."""


# Input errors: the caller asked for something outside the domain

class InputError(SpectralError):
    """Inputs violate a precondition of the requested operation."""


class InvalidWeight(InputError):
    """A weight is non-positive (or complex) somewhere on its support."""


class DegreeOutOfRange(InputError):
    """A polynomial degree exceeds what the recurrence table supports."""


class DegenerateShift(InputError):
    """Shift points coincide or are clustered too tightly."""


class PoleOnSupport(InputError):
    """A pole lies on the real support of the measure."""


class UnsupportedRegime(InputError):
    """The (K, M, N) combination is outside the implemented formulas."""


class ComplexityLimit(InputError):
    """A brute-force evaluation would exceed its configured budget."""


# Numerical errors: inputs are valid but digits were lost

class NumericalError(SpectralError):
    """The computation lost the accuracy it promises."""


class PrecisionLoss(NumericalError):
    """Positivity or convergence was lost (too few nodes or digits)."""


class SingularDenominator(NumericalError):
    """A determinant that should be nonzero is numerically singular."""


class RefinementFailure(NumericalError):
    """Doubling the quadrature changed a result by more than tolerance."""


class ConfigError(SpectralError):
    """
    Invalid run configuration.

    Args:
        message: Human readable diagnostic
        field: Dotted path of the offending field (e.g. "weight.family")
        line: Line number in the config file, when known
    """

    def __init__(self, message: str, field: Optional[str] = None,
                 line: Optional[int] = None):
        self.field = field
        self.line = line
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field:
            location.append(f"field '{field}'")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")


# Warnings: the value is still returned

class DegreeBoundExceeded(UserWarning):
    """A quadrature rule was asked for a moment beyond its exactness bound."""


class InsufficientSamples(UserWarning):
    """A Monte Carlo estimate did not reach the requested relative error."""


# Process exit codes
EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_VERIFY = 4


def exit_code_for(error: BaseException) -> int:
    """Exit code for an error raised by the core (1 for anything foreign)."""
    if isinstance(error, (ConfigError, InputError)):
        return EXIT_INPUT
    if isinstance(error, NumericalError):
        return EXIT_NUMERICAL
    return 1
