"""Static figure regeneration from experiment CSV outputs.

Consumes the two documented CSV schemas (summary.csv and kappa.csv) and
renders SVG/PNG files; no metric is ever recomputed here.
"""

import matplotlib

matplotlib.use("Agg")

__version__ = "0.1.0"

from .comparison import plot_comparison
from .kappa import plot_kappa

__all__ = ["__version__", "plot_comparison", "plot_kappa"]
