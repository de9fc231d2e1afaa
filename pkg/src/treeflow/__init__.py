"""Tree-structured discrete convex optimization and minimum-cost multiflows."""

__version__ = "0.1.0"
