"""Pulse-loop Gaussian quantum reservoir computing simulator."""

from .errors import ConfigError, NumericalError

__version__ = "0.1.0"

__all__ = ["ConfigError", "NumericalError", "__version__"]
