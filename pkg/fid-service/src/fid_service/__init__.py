"""Fusion-in-decoder generation service for the /generate wire protocol."""

__version__ = "0.1.0"
