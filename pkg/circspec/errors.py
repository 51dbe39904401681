"""
Exception hierarchy for circspec.

Every error carries a machine-readable ``code`` and the process ``exit_status``
the command line front end reports for it.
"""

from typing import Optional


class CircspecError(Exception):
    """Base class for all circspec errors."""

    code = "E_INTERNAL"
    exit_status = 1

    def __init__(self, message: str = ""):
        super().__init__(message)
        self.message = message

    def one_line(self) -> str:
        """Render the error as a single machine-parsable line."""
        text = " ".join(str(self.message).split())
        return f"{self.code}: {text}" if text else self.code


# Input and usage errors (exit 4)

class InputError(CircspecError):
    """Base class for errors caused by malformed input or arguments."""

    code = "E_INPUT"
    exit_status = 4


class InvalidInput(InputError):
    """A document, setting or argument does not satisfy its schema."""


class UnknownCorpusName(InputError):
    code = "E_UNKNOWN_CORPUS"


class NonCommensurateShift(InputError):
    """A grid function was asked for a shift that is not a multiple of its step."""

    code = "E_NON_COMMENSURATE"


class WindowOutOfDomain(InputError):
    """Values were requested outside the sampled window."""

    code = "E_WINDOW_DOMAIN"


class WindowTooShort(InputError):
    """A series or scan needs more translates than the window holds."""

    code = "E_WINDOW_SHORT"


class LambdaOnCircle(InputError):
    code = "E_LAMBDA_ON_CIRCLE"


class LambdaOnImaginaryAxis(InputError):
    code = "E_LAMBDA_ON_AXIS"


class TimeReversed(InputError):
    code = "E_TIME_REVERSED"


class ModuleOverflow(InputError):
    """The truncated frequency module exceeds the configured mode budget."""

    code = "E_MODULE_OVERFLOW"


class EpsilonTooLarge(InputError):
    code = "E_EPSILON"

    def __init__(self, epsilon: float, threshold: float):
        super().__init__(
            f"epsilon={epsilon:.6g} is not below the admissible threshold {threshold:.6g}"
        )
        self.epsilon = epsilon
        self.threshold = threshold


# Resonance (exit 3)

class Resonance(CircspecError):
    """The monodromy spectrum meets the spectrum of the forcing."""

    code = "E_RESONANCE"
    exit_status = 3

    def __init__(self, message: str, gap: Optional[float] = None, omega: Optional[float] = None):
        super().__init__(message)
        self.gap = gap
        self.omega = omega


# Certification failures (exit 2)

class CertificationFailure(CircspecError):
    code = "E_CERTIFICATION"
    exit_status = 2

    def __init__(self, message: str, residual: Optional[float] = None):
        super().__init__(message)
        self.residual = residual


class CutoffActiveAtFixedPoint(CertificationFailure):
    """The Picard fixed point lies outside the cut-off ball."""

    code = "E_CUTOFF_ACTIVE"


class IterationDiverged(CertificationFailure):
    code = "E_DIVERGED"


# Numerical failures (exit 1)

class IntegrationFailure(CircspecError):
    code = "E_INTEGRATION"
    exit_status = 1
