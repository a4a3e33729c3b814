"""Monte Carlo quantiles of ``sup w|B|`` with a tolerance-driven budget.

:func:`compute_quantile` picks a discretisation level ``n0``, draws
``k0 = ceil(eps^-2)`` independent approximations of the supremum at that
level and returns their ``ceil(q k0)``-th order statistic, together with
a distribution-free binomial confidence interval.

For the adaptive engine ``n0`` is the smallest ``10 * 2^i`` at which the
mean of ``m = 1000`` coupled differences ``|A_2n - A_n|`` is at most
``eps``. For the equidistant engine ``n0`` is read off a calibration table
of measured strong errors (see :mod:`bridgesup.calibration`).
"""

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.stats import binom

from .sampler import map_replications
from .supapprox import ENGINES, batch_kernel
from .weights import WeightParams

# stream indices below this serve the precompute levels i = 0, 1, ...
SAMPLE_STREAM = 1 << 32


class PrecomputeDivergence(RuntimeError):
    """No admissible ``n0`` was found within ``i_max`` doublings."""


class InsufficientSamples(ValueError):
    """The sample is too small for a confidence interval at the requested level."""


def _exact(value):
    # decimal reading of the float, so 0.01 means 1/100 and not 0.01000...0208
    return Fraction(repr(float(value)))


def sample_size(epsilon):
    """``ceil(eps^-2)``, exact at perfect squares such as ``eps = 0.01``."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    return math.ceil(1 / _exact(epsilon) ** 2)


def order_index(q, k):
    """1-based rank ``ceil(q k)``."""
    return max(1, math.ceil(_exact(q) * k))


def order_statistic(samples, index):
    """The ``index``-th smallest value (1-based), by selection rather than sorting."""
    samples = np.asarray(samples, dtype=np.float64).ravel()
    if not 1 <= index <= samples.size:
        raise IndexError(f"order index {index} outside 1..{samples.size}")
    return float(np.partition(samples, index - 1)[index - 1])


def binomial_ci_ranks(k, q, alpha):
    """Ranks ``(a, b)`` with ``P(a <= Z < b) >= 1 - alpha``, ``Z ~ Bin(k, q)``.

    ``a`` is the largest rank with ``P(Z < a) <= alpha/2`` and ``b`` the
    smallest with ``P(Z >= b) <= alpha/2``.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in ]0, 1[, got {alpha!r}")
    ranks = np.arange(1, k + 1)
    lower_ok = binom.cdf(ranks - 1, k, q) <= alpha / 2
    upper_ok = binom.sf(ranks - 1, k, q) <= alpha / 2
    if not lower_ok.any() or not upper_ok.any():
        raise InsufficientSamples(
            f"no ranks 1 <= a < b <= {k} reach coverage {1 - alpha} for q={q}"
        )
    a = int(ranks[lower_ok][-1])
    b = int(ranks[upper_ok][0])
    if a >= b:
        raise InsufficientSamples(f"degenerate ranks a={a}, b={b} for k={k}, q={q}")
    return a, b


def binomial_coverage(k, q, a, b):
    """``P(a <= Z <= b - 1)`` for ``Z ~ Bin(k, q)``."""
    return float(binom.cdf(b - 1, k, q) - binom.cdf(a - 1, k, q))


def binomial_ci(samples, q, alpha):
    """Conservative ``1 - alpha`` interval ``[Y_(a), Y_(b)]`` for the q-quantile."""
    samples = np.asarray(samples, dtype=np.float64).ravel()
    a, b = binomial_ci_ranks(samples.size, q, alpha)
    part = np.partition(samples, [a - 1, b - 1])
    return float(part[a - 1]), float(part[b - 1])


def precompute_n0(params, seed, epsilon, m=1000, i_max=20, workers=None):
    """Smallest ``n = 10 * 2^i`` whose mean coupled difference is <= ``epsilon``.

    Level ``i`` uses the fresh stream ``(seed, i)``: each of the ``m``
    replications runs ``2n`` adaptive steps and records ``|m_2n - m_n|``.
    """
    params.require_bounded()
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    for i in range(i_max + 1):
        n = 10 * 2**i
        per_rep, kernel = batch_kernel(params, "adaptive", 2 * n, checkpoints=(n,))
        maxima = map_replications(kernel, seed, i, m, per_rep, workers)
        if np.mean(np.abs(maxima[:, 1] - maxima[:, 0])) <= epsilon:
            return n
    raise PrecomputeDivergence(
        f"mean coupled difference stayed above epsilon={epsilon} up to n={10 * 2**i_max}"
    )


@dataclass(frozen=True)
class QuantileRequest:
    params: WeightParams
    q: float
    epsilon: float
    seed: int = 0
    engine: str = "adaptive"
    ci_level: float = 0.95
    m: int = 1000
    i_max: int = 20
    workers: int | None = field(default=None, compare=False)

    def __post_init__(self):
        self.params.require_bounded()
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"q must lie in ]0, 1[, got {self.q!r}")
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if not 0.0 < self.ci_level < 1.0:
            raise ValueError(f"ci_level must lie in ]0, 1[, got {self.ci_level!r}")
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}; use one of {ENGINES}")


@dataclass(frozen=True)
class QuantileResult:
    quantile: float
    n0: int
    k0: int
    ci: tuple[float, float] | None
    order_index: int
    elapsed: float
    seed: int
    engine: str

    def same_numbers(self, other):
        """Equality of everything except the wall-clock time."""
        return (self.quantile, self.n0, self.k0, self.ci, self.order_index, self.seed, self.engine) == (
            other.quantile, other.n0, other.k0, other.ci, other.order_index, other.seed, other.engine,
        )


def draw_samples(params, engine, n0, k, seed, workers=None):
    """``k`` independent values of ``A_n0`` from the sampling stream of ``seed``."""
    per_rep, kernel = batch_kernel(params, engine, n0)
    return map_replications(kernel, seed, SAMPLE_STREAM, k, per_rep, workers)[:, -1]


def compute_quantile(req):
    """Run the full pipeline for one :class:`QuantileRequest`.

    The confidence interval is ``None`` when ``k0`` is too small to reach
    ``ci_level`` (e.g. ``epsilon`` close to 1).
    """
    t0 = time.perf_counter()
    if req.engine == "adaptive":
        n0 = precompute_n0(req.params, req.seed, req.epsilon, req.m, req.i_max, req.workers)
    else:
        from .calibration import equidistant_n0

        n0 = equidistant_n0(req.params, req.epsilon)
    k0 = sample_size(req.epsilon)
    samples = draw_samples(req.params, req.engine, n0, k0, req.seed, req.workers)
    idx = order_index(req.q, k0)
    try:
        a, b = binomial_ci_ranks(k0, req.q, 1.0 - req.ci_level)
    except InsufficientSamples:
        part = np.partition(samples, idx - 1)
        ci = None
    else:
        part = np.partition(samples, sorted({a - 1, idx - 1, b - 1}))
        ci = (float(part[a - 1]), float(part[b - 1]))
    value = float(part[idx - 1])
    return QuantileResult(
        quantile=value,
        n0=n0,
        k0=k0,
        ci=ci,
        order_index=idx,
        elapsed=time.perf_counter() - t0,
        seed=req.seed,
        engine=req.engine,
    )
