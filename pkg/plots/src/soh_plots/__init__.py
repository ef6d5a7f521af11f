"""Standalone figure package for solver snapshot text mirrors."""

from .figures import (DENSITY_CMAP, SIGNED_CMAP, FigureSpec, plot_cross_section,
                      plot_density, plot_lane_panels, plot_quiver, render)
from .textio import SnapshotFormatError, TextSnapshot, read_diagnostics, read_snapshot_text

__version__ = "0.1.0"
