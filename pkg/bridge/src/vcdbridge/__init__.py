"""Flat-buffer scoring boundary for the video-consistency metric."""

from .bridge import FlatVideoBuffer, score_buffer

__version__ = "1.0.0"

__all__ = ["FlatVideoBuffer", "score_buffer"]
