"""Plot regeneration from stringbreak CSV artifacts. No physics here."""

__version__ = "0.1.0"

from .render import SchemaError, load_table, render_figure  # noqa: F401
from .recipes import RECIPES, FigureRecipe  # noqa: F401
