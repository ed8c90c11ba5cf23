"""Figure rendering for the spatial epidemic simulator's CSV outputs."""

from .render import build_figure, render
from .specs import FigureDataError, FigureSpec, SeriesSpec, load_manifest, spec_from_manifest

__version__ = "0.1.0"
