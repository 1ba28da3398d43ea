"""Toric K-stability of labelled polygons with cusp facets."""

__version__ = "0.1.0"
