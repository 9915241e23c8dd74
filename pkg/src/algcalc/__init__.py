"""Symbolic exterior calculus on Lie algebroids over a single chart."""

__version__ = "0.1.0"
