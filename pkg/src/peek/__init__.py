"""Automatic path and mask annotation for robot trajectory videos."""

__version__ = "0.1.0"
