"""Convergence-curve rendering for tdlab run CSVs."""

from .render import PlotSpec, SchemaError, read_run_csv, render

__version__ = "0.1.0"
