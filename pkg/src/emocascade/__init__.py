"""Emotion measurement, cascade analytics and multilevel effect estimation."""

from .emotions import EMOTIONS

__version__ = "0.1.0"
__all__ = ["EMOTIONS", "__version__"]
