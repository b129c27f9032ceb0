"""Smartwatch activity-recognition experiment toolkit."""

__version__ = "0.1.0"
