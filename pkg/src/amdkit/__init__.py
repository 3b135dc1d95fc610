"""Numerical certification of calibrated singular complexes and SL normal bundles."""

__version__ = "0.1.0"
