"""Exact-arithmetic mirror-symmetry toolkit for stacky fans."""

__version__ = "0.1.0"
