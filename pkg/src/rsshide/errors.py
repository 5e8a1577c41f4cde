"""Exception types raised across the package."""


class RssHideError(Exception):
    """Base class for all package errors."""


class ParameterError(RssHideError, ValueError):
    """A distribution or calculator received malformed parameters."""


class PerfectHidingError(ParameterError):
    """The two hypotheses coincide, so no finite number of readings suffices."""


class GeometryError(ParameterError):
    """A 2D scene violates a geometric precondition."""


class ConfigurationError(RssHideError, ValueError):
    """A simulation or experiment configuration is rejected before running."""


class ProtocolError(RssHideError, ValueError):
    """A sender protocol was used outside its contract."""


class EmissionRangeError(ProtocolError):
    """An emitted strength fell outside [0, M]."""


class ImpossibleObservationError(RssHideError, ValueError):
    """A reading (or reading sequence) has zero likelihood under both hypotheses."""


class NumericError(RssHideError, ArithmeticError):
    """A numerical routine failed to converge."""
