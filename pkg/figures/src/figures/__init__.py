"""Rendering tools for experiment-harness result CSVs.

Turns the harness's results files into power-curve panels (one image
per design distribution) and a fixed-layout empirical-size text table.
The input contract is purely the CSV schema; this package never calls
the experiment code itself.
"""

from .core import (
    ColumnMissing,
    EmptySelection,
    FigureSpec,
    PanelInfo,
    load_results,
    render_power_curves,
    render_size_table,
)

__all__ = [
    "ColumnMissing",
    "EmptySelection",
    "FigureSpec",
    "PanelInfo",
    "load_results",
    "render_power_curves",
    "render_size_table",
]

__version__ = "0.1.0"
