"""Coloured Petri nets: the `.pnet` format, the simulator and place monitors."""

from .engine import enabled_bindings, fire_binding, initial_state, run, step
from .functions import FunctionRegistry, default_registry
from .monitors import Monitor, monitor_stats, stats_to_csv
from .pnet import load_model, parse_model, print_model

__all__ = [
    "FunctionRegistry",
    "Monitor",
    "default_registry",
    "enabled_bindings",
    "fire_binding",
    "initial_state",
    "load_model",
    "monitor_stats",
    "parse_model",
    "print_model",
    "run",
    "stats_to_csv",
    "step",
]
