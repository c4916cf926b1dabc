"""loopsim: deterministic simulator for autonomous control loops sharing a
small edge/core cluster, with conflict detection and priority arbitration."""

from .scenario import Scenario, list_scenarios, load_scenario
from .sim import Metrics, World, run, summarize, verify_trace
from .trace import Trace, load_trace, parse_trace

__version__ = "0.1.0"

__all__ = [
    "Scenario",
    "list_scenarios",
    "load_scenario",
    "Metrics",
    "World",
    "run",
    "summarize",
    "verify_trace",
    "Trace",
    "load_trace",
    "parse_trace",
    "__version__",
]
