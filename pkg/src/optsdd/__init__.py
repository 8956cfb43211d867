"""Spline dimensional decomposition surrogates with data-driven knot placement."""

__version__ = "0.1.0"
