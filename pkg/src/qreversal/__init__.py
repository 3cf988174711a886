"""Coherent quantum reversers: Petz maps, Kraus reversers and their numerical checks."""

__version__ = "0.1.0"
