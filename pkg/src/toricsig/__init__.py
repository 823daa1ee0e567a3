"""Exact computation of the loop-space signature of smooth complete toric varieties."""

__version__ = "0.1.0"
