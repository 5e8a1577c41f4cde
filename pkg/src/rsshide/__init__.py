"""Simulation and analysis of signal-strength hiding against passive adversaries."""

from .dist import (
    Kind,
    LlrState,
    NoiseDistribution,
    confidence_from_llr,
    kl_divergence,
    llr_update,
    log_pdf,
    sample,
)
from .errors import (
    ConfigurationError,
    EmissionRangeError,
    GeometryError,
    ImpossibleObservationError,
    NumericError,
    ParameterError,
    PerfectHidingError,
    ProtocolError,
    RssHideError,
)

__version__ = "0.1.0"
