"""Exception hierarchy shared by the solver, scenarios and CLI."""


class SohError(Exception):
    """Base class for all package errors."""


class ConfigError(SohError):
    """Invalid run configuration (unknown key, bad type, constraint violation)."""


class DomainError(SohError):
    """Argument outside the mathematical domain of an operation."""


class NegativePressureError(SohError):
    """A negative implicit-pressure value was requested.

    This is the signature of the vacuum/negative-pressure instability; runs
    should abort with a diagnostic rather than continue.
    """


class NewtonConvergenceError(SohError):
    """The nonlinear elliptic solve did not reach its residual tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class BlowupError(SohError):
    """The explicit reference stepper produced a non-finite or inadmissible state."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class SnapshotError(SohError):
    """Snapshot file is truncated, corrupt, or of an unsupported version."""
