"""Exception types raised by the solver and the experiment harness."""


class WBKTError(Exception):
    """Base class for all package errors."""


class ConfigError(WBKTError, ValueError):
    """Invalid grid, scheme or experiment configuration."""


class SolverError(WBKTError, RuntimeError):
    """Base class for failures during time stepping."""


class NonphysicalState(SolverError):
    """Density or pressure became nonpositive."""


class DegenerateFan(SolverError):
    """A subdomain of the Riemann-fan partition has nonpositive area.

    Usually the time step is too large for the local wave speeds.
    """


class DivisionByZeroSpeed(SolverError):
    """Both one-sided speeds vanish at an interface whose states differ."""


class PointOutsideCell(WBKTError, ValueError):
    """A reconstruction was evaluated outside the cell that owns it."""


class GridMismatch(WBKTError, ValueError):
    """Two fields cannot be compared on a common grid."""


class NonPositiveError(WBKTError, ValueError):
    """An error norm that must be positive is not."""
