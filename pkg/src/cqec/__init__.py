"""Continuous quantum error correction by weak measurement and filtered feedback."""

__version__ = "0.1.0"
