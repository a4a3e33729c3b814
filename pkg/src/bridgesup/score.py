"""Greedy refinement score for a subinterval of the current partition."""

import math
from dataclasses import dataclass

from numba import njit

from .refmath import _psi, _psi_tilde
from .weights import Interval, _interval_weight

# children narrower than this are never worth splitting
MIN_WIDTH = 2.0**-52


@dataclass(frozen=True)
class ScoreInputs:
    iv: Interval
    x: float
    y: float
    m: float

    def __post_init__(self):
        if not (math.isfinite(self.m) and self.m >= 0.0):
            raise ValueError(f"threshold m must be finite and >= 0, got {self.m!r}")
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("bridge values x, y must be finite")


@njit(cache=True)
def _score(eta, gamma, lo, hi, x, y, m, stabilized):
    v = _interval_weight(eta, gamma, lo, hi)
    if v == 0.0:
        return 0.0
    h = math.sqrt(hi - lo)
    shift = 2.0 * m / v
    a_up = (x + y - shift) / h
    a_down = -(x + y + shift) / h
    if stabilized:
        return 0.5 * v * h * (_psi_tilde(a_up) + _psi_tilde(a_down))
    return 0.5 * v * h * (_psi(a_up) + _psi(a_down))


def score(params, s, stabilized=True):
    """Expected excess of ``v * |Z|`` over ``m``, ``Z`` the conditional
    midpoint value ``N((x+y)/2, (hi-lo)/4)``.

    ``stabilized=False`` evaluates the exact closed form with ``psi``
    instead of ``psi_tilde``; it exists for checking against quadrature.
    """
    return float(_score(params.eta, params.gamma, s.iv.lo, s.iv.hi, s.x, s.y, s.m, stabilized))
