"""Exact symbolic calculus and structure checks for Lie/Jacobi algebroids."""

__version__ = "0.1.0"
