"""Equivalence transformations for a hierarchy of Burgers-type equation classes."""

__version__ = "0.1.0"
