"""Executable finite models of forcing constructions: posets, names, generics, trees, Prikry, Gödel operations."""

__version__ = "0.1.0"
