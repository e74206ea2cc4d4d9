"""Trace-decreasing quantum dynamical maps: divisibility, information flow and entanglement."""

__version__ = "0.1.0"

from .channel import QuantumOperation
from .dynamics import PdlParams, TimeGrid

__all__ = ["QuantumOperation", "PdlParams", "TimeGrid", "__version__"]
