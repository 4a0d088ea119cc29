"""Post-hoc figure rendering for rkpar bench/analyze CSV output."""

from .render import FigureSpec, FigureKitError, MissingColumnsError, make_figure, render

__all__ = [
    "FigureSpec",
    "FigureKitError",
    "MissingColumnsError",
    "make_figure",
    "render",
]
