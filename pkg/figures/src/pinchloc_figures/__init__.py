"""Figure rendering for localization experiment tables.

Reads only the emitting package's documented CSV/JSON interface, so it
installs and runs without the simulation package present.
"""
from .render import ColumnMismatchError, FigureSpec, render

__version__ = "0.1.0"

__all__ = ["ColumnMismatchError", "FigureSpec", "render"]
