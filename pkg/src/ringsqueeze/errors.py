"""Exception hierarchy.

The CLI maps these onto exit codes: ``ConfigError`` -> 2, ``PhysicsError`` -> 3.
"""

from __future__ import annotations


class RingSqueezeError(Exception):
    """Base class for all package errors."""


class ConfigError(RingSqueezeError):
    """Malformed or invalid configuration. ``key`` names the offending entry."""

    def __init__(self, key: str | None, message: str):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class PhysicsError(RingSqueezeError):
    """The requested operating point lies outside the model's domain of validity."""


class ConvergenceError(PhysicsError):
    def __init__(self, message: str, residual: float | None = None, trace=None):
        self.residual = residual
        self.trace = list(trace) if trace is not None else []
        super().__init__(message)


class FoldError(PhysicsError):
    """Continuation in pump power reached a turning point (onset of bistability)."""

    def __init__(self, message: str, critical_power: float):
        self.critical_power = critical_power
        super().__init__(message)


class UnstableError(PhysicsError):
    """Drift matrix has an eigenvalue with non-negative real part (above threshold)."""

    def __init__(self, message: str, abscissa: float):
        self.abscissa = abscissa
        super().__init__(message)


class IllConditionedError(PhysicsError):
    def __init__(self, message: str, condition_number: float):
        self.condition_number = condition_number
        super().__init__(message)


class InconsistentInputError(RingSqueezeError):
    """Inputs computed at different operating points were combined."""


class ConstraintError(PhysicsError):
    """A constrained sweep target cannot be reached below the fold/threshold power."""


class SettlingError(PhysicsError):
    """Time integration window too short for the response to decay."""

    def __init__(self, message: str, remaining: float):
        self.remaining = remaining
        super().__init__(message)
