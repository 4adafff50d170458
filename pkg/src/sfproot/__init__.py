"""Verification toolkit for square-free primitive roots below p^alpha."""

__version__ = "0.1.0"
