"""Infinite qualitative simulation by constraint programming."""

__version__ = "0.1.0"
