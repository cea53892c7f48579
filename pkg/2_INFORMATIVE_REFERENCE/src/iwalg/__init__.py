# exposed to user
from .core.context import RingContext
from .core.errors import IwalgError
from .core.literal import parse_series
from .core.models import Outcome, Truth, Verdict
from .core.series import PowerSeries
from .modules.module import IwasawaModule
from .modules.parser import load_module, parse_module

__all__ = [
    "IwalgError",
    "IwasawaModule",
    "Outcome",
    "PowerSeries",
    "RingContext",
    "Truth",
    "Verdict",
    "load_module",
    "parse_module",
    "parse_series",
]

__version__ = "0.1.0"
