"""Quantiles of weighted suprema of reflecting Brownian bridges.

The distribution of ``S = sup_t w(t) |B(t)|`` for a Brownian bridge ``B``
and ``w(t) = 1{eta < t < 1-eta} (t(1-t))^(-gamma)`` gives the critical
values of weighted CUSUM change-point tests. This package approximates
``S`` pathwise (adaptive or equidistant refinement), estimates its
quantiles by Monte Carlo with a tolerance-driven budget, and applies the
resulting test to data.
"""

from .cusum import (
    ConfigurationError,
    DataError,
    SeriesSample,
    TestOutcome,
    critical_value,
    cusum_partial,
    cusum_partials,
    cusum_statistic,
    run_test,
    threshold_curve,
)
from .quantile import (
    InsufficientSamples,
    PrecomputeDivergence,
    QuantileRequest,
    QuantileResult,
    binomial_ci,
    compute_quantile,
    order_statistic,
    precompute_n0,
)
from .refmath import darling_erdos_critical, kolmogorov_cdf, kolmogorov_quantile
from .sampler import RandomStream
from .score import ScoreInputs, score
from .supapprox import AdaptiveRun, adaptive_sup, equidistant_sup
from .weights import Interval, ParameterError, WeightParams, interval_weight, weight

__version__ = "0.1.0"

__all__ = [
    "AdaptiveRun",
    "ConfigurationError",
    "DataError",
    "InsufficientSamples",
    "Interval",
    "ParameterError",
    "PrecomputeDivergence",
    "QuantileRequest",
    "QuantileResult",
    "RandomStream",
    "ScoreInputs",
    "SeriesSample",
    "TestOutcome",
    "WeightParams",
    "adaptive_sup",
    "binomial_ci",
    "compute_quantile",
    "critical_value",
    "cusum_partial",
    "cusum_partials",
    "cusum_statistic",
    "darling_erdos_critical",
    "equidistant_sup",
    "interval_weight",
    "kolmogorov_cdf",
    "kolmogorov_quantile",
    "order_statistic",
    "precompute_n0",
    "run_test",
    "score",
    "threshold_curve",
    "weight",
]
