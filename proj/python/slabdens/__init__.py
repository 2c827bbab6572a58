"""Density estimation by projection onto per-coefficient confidence slabs.

The heavy lifting lives in the compiled extension; this package re-exports
the flat functional surface:

    >>> import slabdens
    >>> pts = slabdens.sample("blocks", 1024, seed=1)
    >>> fam = slabdens.family("histogram-8")
    >>> fit = slabdens.fit(pts, fam, method="improved-grid", algo="greedy")
    >>> slabdens.risk(fam, fit["coefficients"], "blocks")  # doctest: +SKIP
"""

from slabdens._core import (
    Density,
    Family,
    SlabdensError,
    __version__,
    coverage_csv,
    density,
    estimate_coefficient,
    evaluate,
    family,
    figure2_csv,
    fit,
    hard_threshold,
    interval,
    rates_csv,
    risk,
    sample,
)

__all__ = [
    "Density",
    "Family",
    "SlabdensError",
    "__version__",
    "coverage_csv",
    "density",
    "estimate_coefficient",
    "evaluate",
    "family",
    "figure2_csv",
    "fit",
    "hard_threshold",
    "interval",
    "rates_csv",
    "risk",
    "sample",
]
