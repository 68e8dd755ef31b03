"""Norms, Calderón–Zygmund decompositions and interpolation-inequality checks
for piecewise-constant fields on dyadic grids."""

__version__ = "0.1.0"
