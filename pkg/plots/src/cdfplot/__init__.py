"""CDF figure rendering for simulation CSV output."""

__version__ = "0.1.0"

from .plot import PlotSpec, plot_cdf, read_cdf_csv

__all__ = ["__version__", "PlotSpec", "plot_cdf", "read_cdf_csv"]
