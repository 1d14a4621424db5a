"""Exception types shared across the package.

Only failure modes that callers dispatch on get their own class; everything
else surfaces as ValueError with a message.
"""


class EcoepiError(Exception):
    """Base class for package-specific failures."""


class ScenarioParseError(EcoepiError):
    """Scenario document is structurally malformed (bad JSON, unknown or
    missing keys, wrong record kinds)."""


class ScenarioValidationError(EcoepiError):
    """Scenario parsed but carries inadmissible values (negative
    coefficients, zero mortality, nonpositive tolerances, bad step size)."""


class PositivityViolation(EcoepiError):
    """A step produced a negative or non-finite component, or the implicit
    update could not be bracketed in the nonnegative cone."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class NoConvergence(EcoepiError):
    """An attractor pass failed to settle below tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ReferenceWindowExhausted(EcoepiError):
    """A reference solution was queried outside its recorded window and no
    period is available to extend it."""


class AperiodicInput(EcoepiError):
    """A single-period reduction was requested for coefficients with no
    common integer period."""
