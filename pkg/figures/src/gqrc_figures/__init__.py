"""Figure renderers for gqrc CSV datasets."""

from .render import render
from .schemas import FIGURE_SCHEMAS, SchemaError

__version__ = "0.1.0"

__all__ = ["render", "FIGURE_SCHEMAS", "SchemaError", "__version__"]
