"""Staggered Hermite methods for Hamilton-Jacobi equations in 1D and 2D."""

__version__ = "0.1.0"
