"""Numerical laboratory for random Schrodinger dynamics on periodic lattices."""

__version__ = "0.1.0"
