"""Numerical lab for the dual L_p-Minkowski equation in the rotationally symmetric even class."""

__version__ = "0.1.0"
