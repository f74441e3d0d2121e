"""Solvers for second order equations that change type across curves."""

__version__ = "0.1.0"
