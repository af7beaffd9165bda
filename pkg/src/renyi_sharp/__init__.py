"""Geometric-mean quantum Rényi divergences and the bounds built on them."""

__version__ = "0.1.0"
