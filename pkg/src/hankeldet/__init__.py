"""Hankel determinants of Dirichlet series in extended precision."""

__version__ = "0.1.0"
