from .context import RingContext, require_same_context
from .errors import (
    ContextMismatchError,
    InconsistentCorankError,
    IndeterminateError,
    InvalidLinearElementError,
    IwalgError,
    NotTorsionError,
    OracleSizeError,
    ParseError,
    PrecisionExhaustedError,
    PreparationError,
    SamplingExhaustedError,
    UnsupportedShapeError,
)
from .linear import LinearElement, eliminate_variable, linear_from_series, make_linear_element
from .literal import parse_series
from .series import PowerSeries
