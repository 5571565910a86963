"""Stream-based runtime verification: a small specification language over timed event streams."""

from .errors import SpecError, TraceError, MonitorError, FragmentError
from .streams import EventStream, Progress, Exclusive, Inclusive, INFINITE, make_stream, cut, is_prefix
from .ir import CoreSpec, flatten
from .engine import Limits, Monitor, evaluate

__version__ = "0.1.0"

__all__ = [
    "SpecError", "TraceError", "MonitorError", "FragmentError",
    "EventStream", "Progress", "Exclusive", "Inclusive", "INFINITE", "make_stream", "cut", "is_prefix",
    "CoreSpec", "flatten", "Limits", "Monitor", "evaluate", "__version__",
]
