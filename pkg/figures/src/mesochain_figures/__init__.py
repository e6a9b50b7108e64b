"""Figure rendering for mesochain CSV outputs."""

from .render import FigureSpec, MissingColumnError, render, render_run

__version__ = "0.1.0"
