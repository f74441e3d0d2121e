"""Plots for mixed-type solver run artifacts.

Reads only the solver's documented file formats (grid CSV ``x,y,value``,
region CSV ``x,y,label``, energy CSV ``y,E``, convergence CSV
``h,error``, and ``report.json``) and renders image files.  No linkage
to the solver package itself.
"""

from .render import PlotSpec, SchemaMismatch, render, PLOT_KINDS

__version__ = "0.1.0"

__all__ = ["PlotSpec", "SchemaMismatch", "render", "PLOT_KINDS"]
