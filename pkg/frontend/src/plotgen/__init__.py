"""Render fdrelay sweep CSVs into figure images."""
from .render import FigureRecipe, SchemaError, parse_rows, render

__all__ = ["FigureRecipe", "SchemaError", "parse_rows", "render"]
__version__ = "0.1.0"
