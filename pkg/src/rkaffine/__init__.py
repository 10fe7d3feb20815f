"""Chromatic subdivisions, the R_k affine task, and the simulations around it."""

__version__ = "0.1.0"
