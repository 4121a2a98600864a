"""Exception types shared across the package."""


class LogSolveError(Exception):
    """Base class for all package errors."""


class GridMismatchError(LogSolveError):
    """Two objects that must live on the same grid do not."""


class BoundaryError(LogSolveError):
    """Operation requested on an unsupported boundary type."""


class PositivityViolation(LogSolveError):
    """Coefficient positivity hypotheses (min Q > 0, min(V+Q) > 0) fail."""


class PeriodicityViolation(LogSolveError):
    """Sampled coefficient is not 1-periodic on the grid."""


class ZeroFieldError(LogSolveError):
    """Operation undefined for the zero field."""


class NonpositiveScaleError(LogSolveError):
    """Ray scale s must be positive."""


class ParameterError(LogSolveError):
    """A numerical parameter is outside its admissible range."""


class BoxTooSmallError(LogSolveError):
    """Computational box too small for the requested decaying profile."""


class LineSearchStalledError(LogSolveError):
    """Backtracking line search underflowed without sufficient decrease."""


class NonFiniteEnergyError(LogSolveError):
    """Energy evaluation produced a non-finite value."""


class ConfigError(LogSolveError):
    """Configuration file failed to parse or validate."""


class SchemaMismatchError(LogSolveError):
    """Two report artifacts do not share the same structure."""
