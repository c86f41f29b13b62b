"""Quasihyperbolic geometry of bounded planar domains."""

__version__ = "0.1.0"
