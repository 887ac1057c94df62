"""Convex-geometry toolkit for checking marginal Rogers-Shephard type inequalities."""

__version__ = "0.1.0"
