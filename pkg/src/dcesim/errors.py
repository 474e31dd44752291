"""Exception types shared across the package."""


class DCESimError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(DCESimError, ValueError):
    """A trajectory or run parameter is non-finite or out of range."""


class ContinuityError(DCESimError):
    """Boundary positions do not match at a trajectory junction."""

    def __init__(self, message, gap):
        super().__init__(message)
        self.gap = gap


class DegenerateWindowError(DCESimError):
    """The requested velocity threshold exceeds the peak boundary speed."""


class DegenerateCavityError(DCESimError):
    """Cavity length is not positive at the requested time."""


class NonConvergenceError(DCESimError):
    """Step budget exhausted before reaching the end of the time span."""

    def __init__(self, message, t_reached):
        super().__init__(message)
        self.t_reached = t_reached


class DivergenceError(DCESimError):
    """The integrated state became non-finite."""

    def __init__(self, message, t_reached):
        super().__init__(message)
        self.t_reached = t_reached


class InstabilityError(DCESimError):
    """Matrix magnitudes exceeded the configured cap during cycling."""

    def __init__(self, message, cycle_index):
        super().__init__(message)
        self.cycle_index = cycle_index


class InsufficientDataError(DCESimError):
    """Too few usable points for a fit or regression."""


class ConfigError(DCESimError):
    """Malformed or inconsistent run configuration."""
