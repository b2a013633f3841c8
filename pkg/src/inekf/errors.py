"""Exception types raised across the package."""


class InEKFError(Exception):
    """Base class for all errors raised by :mod:`inekf`."""


class NearAngularSingularity(InEKFError):
    """Rotation angle too close to pi for a reliable logarithm."""


class SlotMismatch(InEKFError):
    """Two SE_k(3) elements with a different number of columns were combined."""


class DimensionMismatch(InEKFError):
    """Array shapes do not agree with the state layout."""


class SingularInnovation(InEKFError):
    """The innovation covariance is singular or badly conditioned."""


class OutOfOrderMeasurement(InEKFError):
    """A measurement arrived older than the state stamp minus the allowed slack."""


class UnknownChannel(InEKFError):
    """A measurement of an unsupported type was dispatched."""


class NonPositiveDt(InEKFError):
    """A propagation step was requested with dt <= 0."""


class NonMonotonicStamp(InEKFError):
    """A stream stamp did not strictly increase."""


class AlreadyAugmented(InEKFError):
    """The leg already owns a contact slot in the state."""


class NotAugmented(InEKFError):
    """The leg does not own a contact slot in the state."""


class IncompatibleShape(InEKFError):
    """The requested sensor cannot be synthesized for this trajectory shape."""


class InsufficientOverlap(InEKFError):
    """Two trajectories do not overlap enough to evaluate a metric."""


class ConfigError(InEKFError):
    """Invalid or inconsistent configuration."""


class LogParseError(InEKFError):
    """A log file could not be parsed.

    Parameters
    ----------
    path : str
        File being parsed.
    line : int
        1-based line number of the offending row.
    message : str
        Description of the problem.
    """

    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{self.path}:{line}: {message}")
