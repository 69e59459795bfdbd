"""
Error hierarchy for the driven JCM engine.
Every failure carries the value that tripped it and maps onto a CLI exit code.
"""
from typing import Any, Optional


class JCMError(Exception):
    """Base class for every error raised by the engine"""

    exit_code = 1

    def __init__(self, message: str, value: Any = None, limit: Any = None,
                 context: Optional[dict] = None):
        super().__init__(message)
        self.message = message
        self.value = value
        self.limit = limit
        self.context = dict(context or {})

    def with_context(self, **context) -> "JCMError":
        """Attach extra context (offending grid value, field, ...) and return self"""
        self.context.update(context)
        return self

    def __str__(self) -> str:
        if not self.context:
            return self.message
        details = ", ".join(f"{key}={value}" for key, value in sorted(self.context.items()))
        return f"{self.message} ({details})"


# ---- configuration / validation (exit 2) ----

class ConfigurationError(JCMError):
    exit_code = 2


class NonPositiveCoupling(ConfigurationError):
    pass


class NegativeRate(ConfigurationError):
    pass


class ConstrictionViolated(ConfigurationError):
    pass


class InvalidFieldSpec(ConfigurationError):
    pass


class InvalidPolicy(ConfigurationError):
    pass


class InvalidGrid(ConfigurationError):
    pass


class CutoffTooSmall(ConfigurationError):
    pass


class InsufficientSamples(ConfigurationError):
    pass


# ---- numerical failures (exit 3) ----

class NumericalError(JCMError):
    exit_code = 3


class TruncationCapExceeded(NumericalError):
    pass


class NormDrift(NumericalError):
    pass


class LeakageExceeded(NumericalError):
    pass


class BoundsViolation(NumericalError):
    pass


class OperatorCheckFailed(NumericalError):
    pass


# ---- analytic vs oracle disagreement (exit 4) ----

class ToleranceBreach(JCMError):
    exit_code = 4
