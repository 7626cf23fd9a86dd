"""Regularized inexact interior-point LP solver with a mixed-precision normal-equations solver."""

__version__ = "0.1.0"
