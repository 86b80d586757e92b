"""Discrete Weibull regression for count data: distribution primitives,
link-function regression, Metropolis-Hastings inference with shrinkage
priors, posterior summaries, model-comparison criteria and the simulation
experiment generators, plus a CLI."""

from .distribution import (
    DWParams,
    SampleCounts,
    cdf,
    estimate_proportions,
    estimate_santos_beta,
    log_pmf,
    mle_single,
    pmf,
    quantile,
    sample,
    summarize_sample,
)
from .exceptions import DataError, DegenerateSampleError, DWRegError, NumericalError

__all__ = [
    "DWParams",
    "SampleCounts",
    "pmf",
    "log_pmf",
    "cdf",
    "quantile",
    "sample",
    "summarize_sample",
    "estimate_proportions",
    "estimate_santos_beta",
    "mle_single",
    "DWRegError",
    "DegenerateSampleError",
    "DataError",
    "NumericalError",
]

__version__ = "0.1.0"
