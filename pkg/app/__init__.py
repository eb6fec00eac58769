"""Damped-wave decay laboratory for exterior domains."""

__version__ = "1.0.0"
