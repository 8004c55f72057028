from .compare import DEFAULT_BINS, MetricEntry, MetricsReport, compare_populations
from .plots import PLOT_NAMES, emit_plots
from .stats import (
    Histogram2D,
    StatResult,
    bhattacharyya,
    bhattacharyya_coefficient,
    chi2_sf,
    chi_square,
    histogram2d,
    kolmogorov_sf,
    ks_statistic,
    ks_two_sample,
    pool_cells,
)

__all__ = [
    "DEFAULT_BINS", "MetricEntry", "MetricsReport", "compare_populations",
    "PLOT_NAMES", "emit_plots",
    "Histogram2D", "StatResult", "bhattacharyya", "bhattacharyya_coefficient", "chi2_sf",
    "chi_square", "histogram2d", "kolmogorov_sf", "ks_statistic", "ks_two_sample", "pool_cells",
]
