"""Special functions and closed-form reference laws.

The normal-distribution helpers come in two flavours: ``_``-prefixed
numba kernels used inside the simulation loops, and checked public
wrappers that reject non-finite input.
"""

import math

from numba import njit

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# psi_tilde switches to its asymptotic branches beyond this magnitude
PSI_CUTOFF = 3.0


@njit(cache=True)
def _pdf(x):
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


@njit(cache=True)
def _cdf(x):
    # erfc keeps relative accuracy in the lower tail
    return 0.5 * math.erfc(-x / _SQRT2)


@njit(cache=True)
def _psi(a):
    return _pdf(a) + a * _cdf(a)


@njit(cache=True)
def _psi_tilde(a):
    if a > PSI_CUTOFF:
        return a
    if a < -PSI_CUTOFF:
        return _pdf(a) / (a * a)
    return _psi(a)


def _check_finite(x, name="x"):
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x!r}")
    return x


def std_normal_pdf(x):
    return float(_pdf(_check_finite(x)))


def std_normal_cdf(x):
    """Standard normal distribution function, evaluated via ``erfc``."""
    return float(_cdf(_check_finite(x)))


def psi(a):
    """``pdf(a) + a * cdf(a)``, i.e. ``E[(Y + a)^+]`` for standard normal ``Y``."""
    return float(_psi(_check_finite(a, "a")))


def psi_tilde(a):
    """Tail-stabilised ``psi``.

    Uses ``a`` above 3 and ``pdf(a) / a**2`` below -3. The three branches
    do not join continuously; that is intended.
    """
    return float(_psi_tilde(_check_finite(a, "a")))


def kolmogorov_cdf(x, tol=1e-16):
    """Distribution function of ``sup |B|`` for a standard Brownian bridge.

    For ``x >= 1`` sums ``1 - 2 * sum (-1)^(k-1) exp(-2 k^2 x^2)``; below 1
    that series converges slowly and the equivalent theta-function form
    ``sqrt(2 pi) / x * sum exp(-(2k-1)^2 pi^2 / (8 x^2))`` is used instead.
    Terms are added until they drop below ``tol`` (relative).
    """
    x = _check_finite(x)
    if x <= 0.0:
        raise ValueError(f"kolmogorov_cdf needs x > 0, got {x!r}")
    total = 0.0
    k = 1
    if x >= 1.0:
        while True:
            term = math.exp(-2.0 * k * k * x * x)
            total += term if k % 2 else -term
            if term < tol:
                break
            k += 1
        return min(max(1.0 - 2.0 * total, 0.0), 1.0)
    c = math.pi * math.pi / (8.0 * x * x)
    while True:
        term = math.exp(-(2 * k - 1) ** 2 * c)
        total += term
        if term <= tol * total:
            break
        k += 1
    return min(math.sqrt(2.0 * math.pi) / x * total, 1.0)


def kolmogorov_quantile(q, xtol=1e-10):
    """Invert :func:`kolmogorov_cdf` by bisection, starting from ``[1e-3, 5]``."""
    q = _check_finite(q, "q")
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in ]0, 1[, got {q!r}")
    lo, hi = 1e-3, 5.0
    while kolmogorov_cdf(lo) > q:
        lo *= 0.5
    while kolmogorov_cdf(hi) < q:
        hi *= 2.0
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if kolmogorov_cdf(mid) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


DARLING_ERDOS_VARIANTS = ("as-stated", "one-sided")


def darling_erdos_critical(n, alpha, sigma=1.0, variant="as-stated"):
    """Asymptotic critical value for the CUSUM statistic with weight
    ``(t(1-t))^(-1/2)``.

    ``variant="as-stated"`` uses ``-log(-log(1-alpha)/2)`` for the
    Gumbel quantile; ``"one-sided"`` drops the factor 1/2, which is the
    form that gives the commonly tabulated 3.241 (n=100) and 3.353
    (n=1000) at alpha=0.05.
    """
    if variant not in DARLING_ERDOS_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; use one of {DARLING_ERDOS_VARIANTS}")
    if int(n) != n or n < 3:
        raise ValueError(f"n must be an integer >= 3, got {n!r}")
    alpha = _check_finite(alpha, "alpha")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in ]0, 1[, got {alpha!r}")
    sigma = _check_finite(sigma, "sigma")
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")

    log_n = math.log(n)
    a = math.sqrt(2.0 * math.log(log_n))
    b = 2.0 * math.log(log_n) + 0.5 * math.log(math.log(log_n)) - 0.5 * math.log(math.pi)
    inner = -math.log(1.0 - alpha)
    if variant == "as-stated":
        inner *= 0.5
    return sigma / a * (-math.log(inner) + b)
