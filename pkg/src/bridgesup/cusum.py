"""Weighted CUSUM statistic and the asymptotic level-alpha change-point test.

For observations ``xi_1..xi_n`` with partial sums centred at the overall mean,

    T_{k,n} = sum_{i<=k} xi_i - (k/n) sum_{i<=n} xi_i,
    T_n(w)  = max_{1<=k<n} w(k/n) |T_{k,n}| / sqrt(n),

and the test rejects "no change in mean" when ``T_n(w) > c``, where ``c`` is
``sigma`` times the ``1 - alpha`` quantile of the weighted supremum of a
reflecting Brownian bridge. Three sources for that quantile are supported:
the Monte Carlo pipeline of :mod:`bridgesup.quantile`, the Kolmogorov
distribution (``eta = gamma = 0``) and the Darling-Erdos approximation
(``eta = 0, gamma = 1/2``).
"""

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .refmath import DARLING_ERDOS_VARIANTS, darling_erdos_critical, kolmogorov_quantile
from .weights import ParameterError

CRITICAL_SOURCES = ("monte-carlo", "darling-erdos", "kolmogorov")


class DataError(ValueError):
    """Malformed or unusable observation data."""


class ConfigurationError(ParameterError):
    """A critical-value source that does not fit the weight parameters."""


def estimate_sigma(observations):
    """Plug-in noise level: sample std-dev of first differences over sqrt(2).

    Differencing removes a single mean shift except at one index, so the
    estimate is not inflated by the change itself. This estimator is a
    convenience; the test theory assumes ``sigma`` known.
    """
    x = np.asarray(observations, dtype=float)
    if x.size < 3:
        raise DataError("need at least 3 observations to estimate sigma")
    s = float(np.std(np.diff(x), ddof=1)) / math.sqrt(2.0)
    if not s > 0.0:
        raise DataError("estimated sigma is zero (series has constant increments)")
    return s


@dataclass(frozen=True, eq=False)
class SeriesSample:
    """Observations and their noise standard deviation.

    With ``sigma=None`` the plug-in :func:`estimate_sigma` is used and
    ``sigma_estimated`` is set. An exactly constant series gets the
    estimate ``0``; the test then never rejects.
    """

    observations: np.ndarray
    sigma: float | None = None
    sigma_estimated: bool = field(default=False, init=False)

    def __post_init__(self):
        x = np.array(self.observations, dtype=float).ravel()
        if x.size < 2:
            raise DataError(f"need at least 2 observations, got {x.size}")
        if not np.all(np.isfinite(x)):
            raise DataError("observations must be finite")
        x.setflags(write=False)
        object.__setattr__(self, "observations", x)
        if self.sigma is None:
            # a constant series carries no noise information; its statistic is 0
            sigma = 0.0 if np.ptp(x) == 0.0 else estimate_sigma(x)
            object.__setattr__(self, "sigma", sigma)
            object.__setattr__(self, "sigma_estimated", True)
        else:
            sigma = float(self.sigma)
            if not (math.isfinite(sigma) and sigma > 0.0):
                raise ValueError(f"sigma must be positive, got {self.sigma!r}")
            object.__setattr__(self, "sigma", sigma)

    @property
    def n(self):
        return self.observations.size


def _parse_float(text, where):
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"{where}: not a number: {text.strip()!r}") from None
    if not math.isfinite(value):
        raise DataError(f"{where}: non-finite value {text.strip()!r}")
    return value


def read_series(path, column=None):
    """Observations from a text file (one number per line) or a CSV column.

    Blank lines are ignored; any other non-numeric entry is an error
    rather than being skipped.
    """
    values = []
    with open(path, newline="") as fh:
        if column is None:
            for lineno, line in enumerate(fh, 1):
                if line.strip():
                    values.append(_parse_float(line, f"{path}:{lineno}"))
        else:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or column not in reader.fieldnames:
                raise DataError(f"{path}: no column named {column!r}")
            for row in reader:
                cell = row[column]
                if cell is None:
                    raise DataError(f"{path}:{reader.line_num}: missing value in column {column!r}")
                if cell.strip():
                    values.append(_parse_float(cell, f"{path}:{reader.line_num}"))
                else:
                    raise DataError(f"{path}:{reader.line_num}: empty cell in column {column!r}")
    if len(values) < 2:
        raise DataError(f"{path}: need at least 2 observations, got {len(values)}")
    return np.asarray(values)


def _observations(series):
    if isinstance(series, SeriesSample):
        return series.observations
    x = np.asarray(series, dtype=float).ravel()
    if x.size < 2:
        raise DataError(f"need at least 2 observations, got {x.size}")
    return x


def cusum_partials(series):
    """``T_{k,n}`` for ``k = 1..n-1`` from one prefix-sum pass."""
    x = _observations(series)
    return np.cumsum(x - x.mean())[:-1]


def cusum_partial(series, k):
    x = _observations(series)
    if int(k) != k or not 1 <= k < x.size:
        raise IndexError(f"k must be an integer in 1..{x.size - 1}, got {k!r}")
    return float(cusum_partials(x)[int(k) - 1])


def index_window(params, n):
    """Inclusive range ``(k_lo, k_hi)`` of ``k`` with ``eta n < k < (1 - eta) n``.

    ``eta`` is read as the decimal it prints as, so ``eta = 0.4, n = 10``
    gives ``(5, 5)``. An empty window has ``k_lo > k_hi``.
    """
    eta = Fraction(repr(params.eta))
    k_lo = math.floor(eta * n) + 1
    k_hi = math.ceil((1 - eta) * n) - 1
    return max(k_lo, 1), min(k_hi, n - 1)


def weighted_values(series, params):
    """``w(k/n) |T_{k,n}| / sqrt(n)`` for ``k = 1..n-1`` (zero outside the window)."""
    x = _observations(series)
    n = x.size
    values = np.zeros(n - 1)
    k_lo, k_hi = index_window(params, n)
    if k_lo > k_hi:
        return values
    k = np.arange(k_lo, k_hi + 1)
    t = k / n
    w = (t * (1.0 - t)) ** (-params.gamma) if params.gamma else 1.0
    values[k_lo - 1 : k_hi] = w * np.abs(cusum_partials(x)[k_lo - 1 : k_hi]) / math.sqrt(n)
    return values


def cusum_statistic(series, params):
    """``T_n(w)``; zero when no ``k`` falls inside the trimming window."""
    return float(weighted_values(series, params).max())


@dataclass(frozen=True, eq=False)
class TestOutcome:
    """Decision of the CUSUM test.

    ``statistic`` is ``T_n(w) / sigma`` and ``critical_value`` is ``c``
    on the data scale (``sigma`` times the unit-noise quantile), so that
    ``reject`` is ``statistic * sigma > critical_value``. ``argmax_k`` is
    the first maximising ``k`` (a change-point hint), ``None`` if the
    window is empty.
    """

    __test__ = False  # not a pytest class

    statistic: float
    critical_value: float
    reject: bool
    argmax_k: int | None
    n: int
    sigma: float
    sigma_estimated: bool
    source: str
    alpha: float | None = None
    values: np.ndarray | None = None

    def to_dict(self):
        out = {
            "statistic": self.statistic,
            "critical_value": self.critical_value,
            "reject": self.reject,
            "argmax_k": self.argmax_k,
            "n": self.n,
            "alpha": self.alpha,
            "sigma": self.sigma,
            "sigma_source": "estimated (first differences, not in the test theory)"
            if self.sigma_estimated
            else "supplied",
            "critical_source": self.source,
        }
        if self.values is not None:
            out["values"] = [float(v) for v in self.values]
        return out


def check_source(params, source):
    if source not in CRITICAL_SOURCES:
        raise ConfigurationError(f"unknown critical-value source {source!r}; use one of {CRITICAL_SOURCES}")
    if source == "kolmogorov" and (params.eta, params.gamma) != (0.0, 0.0):
        raise ConfigurationError("the kolmogorov source requires eta = 0 and gamma = 0")
    if source == "darling-erdos" and not params.is_darling_erdos:
        raise ConfigurationError("the darling-erdos source requires eta = 0 and gamma = 1/2")
    if source == "monte-carlo":
        params.require_bounded()


def critical_value(
    params,
    alpha,
    source="monte-carlo",
    n=None,
    sigma=1.0,
    epsilon=0.01,
    seed=0,
    variant="as-stated",
    workers=None,
):
    """``c`` such that the test ``T_n(w) > c`` has asymptotic level ``alpha``.

    ``n`` is needed only by the Darling-Erdos source, ``epsilon``, ``seed``
    and ``workers`` only by the Monte Carlo source and ``variant`` only
    by Darling-Erdos.
    """
    check_source(params, source)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in ]0, 1[, got {alpha!r}")
    if not (math.isfinite(sigma) and sigma > 0.0):
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    if source == "kolmogorov":
        return sigma * kolmogorov_quantile(1.0 - alpha)
    if source == "darling-erdos":
        if n is None:
            raise ConfigurationError("the darling-erdos source needs the sample size n")
        if variant not in DARLING_ERDOS_VARIANTS:
            raise ConfigurationError(f"unknown variant {variant!r}; use one of {DARLING_ERDOS_VARIANTS}")
        return darling_erdos_critical(n, alpha, sigma, variant)
    from .quantile import QuantileRequest, compute_quantile

    res = compute_quantile(QuantileRequest(params, 1.0 - alpha, epsilon, seed, workers=workers))
    return sigma * res.quantile


def run_test(
    series,
    params,
    alpha=0.05,
    source="monte-carlo",
    critical=None,
    epsilon=0.01,
    seed=0,
    variant="as-stated",
    keep_values=False,
    workers=None,
):
    """Apply the level-``alpha`` test to ``series``.

    ``series`` is a :class:`SeriesSample` (or an array, taken with
    ``sigma = 1``). A precomputed ``critical`` (on the data scale, as
    returned by :func:`critical_value` for the same ``sigma``) skips the
    critical-value computation; the source is still checked.
    """
    if not isinstance(series, SeriesSample):
        series = SeriesSample(series, sigma=1.0)
    check_source(params, source)
    precomputed = critical is not None
    if series.sigma == 0.0:
        # constant series with estimated sigma: T_n(w) = 0 and c = 0 * quantile
        return TestOutcome(0.0, 0.0, False, None, series.n, 0.0, True, source, float(alpha))
    if not precomputed:
        critical = critical_value(
            params, alpha, source, series.n, series.sigma, epsilon, seed, variant, workers
        )
    elif not (math.isfinite(critical) and critical > 0.0):
        raise ValueError(f"critical value must be positive, got {critical!r}")
    values = weighted_values(series, params)
    k_lo, k_hi = index_window(params, series.n)
    if k_lo > k_hi:
        stat, argmax = 0.0, None
    else:
        j = int(np.argmax(values))
        stat, argmax = float(values[j]), j + 1
    return TestOutcome(
        statistic=stat / series.sigma,
        critical_value=float(critical),
        reject=bool(stat > critical),
        argmax_k=argmax,
        n=series.n,
        sigma=series.sigma,
        sigma_estimated=series.sigma_estimated,
        source=f"{source} (precomputed)" if precomputed else source,
        alpha=float(alpha),
        values=values if keep_values else None,
    )


def threshold_curve(params, c, n=101):
    """Rejection boundary ``f(t) = c (t(1-t))^gamma`` on ``n`` uniform points of ``[0, 1]``.

    ``|T_{k,n}| / sqrt(n)`` crossing ``f(k/n)`` is equivalent to rejection.
    The trimming window is not applied. Returns ``(t, f)``.
    """
    if not (math.isfinite(c) and c > 0.0):
        raise ValueError(f"c must be positive, got {c!r}")
    if n < 2:
        raise ValueError(f"need at least 2 grid points, got {n!r}")
    t = np.linspace(0.0, 1.0, n)
    return t, c * (t * (1.0 - t)) ** params.gamma
