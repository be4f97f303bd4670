"""Offline figure generation from dampedflow CSV artifacts."""

from .figures import FigureSpec, KINDS, SchemaError, fit_decay_slope, plot

__version__ = "0.1.0"
