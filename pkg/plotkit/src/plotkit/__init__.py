"""Figure rendering for wellflow trajectory and ensemble CSV files."""

__version__ = "0.1.0"

from .render import (ColumnMismatchError, PlotSpec, ReportFormatError,
                     plot_current, read_slope_report, read_trajectory_csv)

__all__ = ["ColumnMismatchError", "PlotSpec", "ReportFormatError",
           "plot_current", "read_slope_report", "read_trajectory_csv"]
