"""Numerical toolkit for shifted convolution Dirichlet series."""
__version__ = "0.1.0"
