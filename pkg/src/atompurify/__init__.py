"""Two-qubit entanglement distillation and recurrence purification with
cavity-QED and linear-optics building blocks."""

from . import bsm, cavity, channels, filtering, measures, polarizer, qtypes, recurrence

__version__ = "0.1.0"

__all__ = ["bsm", "cavity", "channels", "filtering", "measures", "polarizer", "qtypes", "recurrence"]
