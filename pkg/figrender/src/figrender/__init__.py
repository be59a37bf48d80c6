"""Offline figure rendering for branch-trajectory and grid data files.

Read-only by design: every number in a figure comes from an input CSV/JSON
field; nothing is recomputed.  A lint test in the suite enforces this.
"""

from .spec import EmptyInput, FigureSpec, SchemaMismatch
from .render import render

__all__ = ["FigureSpec", "render", "SchemaMismatch", "EmptyInput"]
__version__ = "0.1.0"
