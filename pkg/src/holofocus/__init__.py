"""Untrained in-line holography reconstruction with reverse-attention autofocusing."""

__version__ = "0.1.0"
