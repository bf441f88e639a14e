"""Static figure rendering for divsum experiment CSV outputs."""

from .render import FigureRecipe, NoDataError, RECIPES, SchemaError, recipe_for, render

__version__ = "0.1.0"
