"""Expansive self-maps of metric spaces: classification and exhaustive checks."""

__version__ = "0.1.0"
