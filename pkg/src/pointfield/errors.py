"""Exception hierarchy for parameter validation, solver diagnostics and config parsing."""


class PointfieldError(Exception):
    """Base class for all errors raised by this package."""


# --- parameter validation -------------------------------------------------

class ParameterError(PointfieldError, ValueError):
    """Invalid physical parameters."""


class NonPositiveMass(ParameterError):
    pass


class NonPositiveSpeed(ParameterError):
    pass


class SuperluminalInitialVelocity(ParameterError):
    """|v0| >= c: outside the regime where the damped solution exists."""


class NegativeSigma(ParameterError):
    pass


class ZeroCoupling(ParameterError):
    """beta = 0 degenerates to a free particle plus a free field."""


# --- evaluation / solver --------------------------------------------------

class OutOfRange(PointfieldError, ValueError):
    """Evaluation time or position outside the valid domain."""


class NonConvergence(PointfieldError, RuntimeError):
    """A root bracket failed; signals an internal bug, not bad input."""


class HorizonExceeded(PointfieldError, ValueError):
    """Requested time lies beyond the trajectory horizon."""


class UndefinedAtKink(PointfieldError, ValueError):
    """The field time-derivative has no value at x = y(t) or x = +-ct."""


class CflViolation(PointfieldError, ValueError):
    """Courant number c*dt/dx above the stability threshold."""


class SourceUnderresolved(PointfieldError, ValueError):
    """sigma < 4*dx: the mollified source aliases on the grid."""


class SuperluminalVelocity(PointfieldError, RuntimeError):
    """|v| reached c during a coupled run: discretization failure.

    Carries the partial run results (if any) in ``partial`` so that callers
    can flush what was computed before the abort.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class InsufficientSamples(PointfieldError, ValueError):
    """Not enough ledger samples inside the requested fit window."""


# --- config parsing -------------------------------------------------------

class ConfigError(PointfieldError, ValueError):
    """Malformed run configuration; ``line`` is the offending 1-based line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnknownKey(ConfigError):
    pass


class MissingKey(ConfigError):
    pass


class BadValue(ConfigError):
    pass
