"""The weight family ``w(t) = 1{eta < t < 1-eta} * (t(1-t))^(-gamma)``."""

import math
from dataclasses import dataclass, field

from numba import njit


class ParameterError(ValueError):
    """Invalid weight parameters or an unsupported parameter combination."""


@dataclass(frozen=True)
class WeightParams:
    """Trimming ``eta`` in ``[0, 1/2[`` and exponent ``gamma`` in ``[0, 1/2]``.

    The pair ``(0, 1/2)`` makes the weighted supremum infinite almost surely
    and is refused unless ``unbounded=True``; only the Darling-Erdos route of
    the CUSUM test uses that escape hatch (see :meth:`darling_erdos`).
    """

    eta: float = 0.0
    gamma: float = 0.0
    unbounded: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        eta, gamma = float(self.eta), float(self.gamma)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "gamma", gamma)
        if not (math.isfinite(eta) and 0.0 <= eta < 0.5):
            raise ParameterError(f"eta must lie in [0, 1/2[, got {eta!r}")
        if not (math.isfinite(gamma) and 0.0 <= gamma <= 0.5):
            raise ParameterError(f"gamma must lie in [0, 1/2], got {gamma!r}")
        if self.is_darling_erdos and not self.unbounded:
            raise ParameterError(
                "(eta, gamma) = (0, 1/2) is excluded: the weighted supremum of the "
                "reflecting Brownian bridge is infinite for this weight"
            )

    @classmethod
    def darling_erdos(cls):
        return cls(0.0, 0.5, unbounded=True)

    @property
    def is_darling_erdos(self):
        return self.eta == 0.0 and self.gamma == 0.5

    def require_bounded(self):
        if self.is_darling_erdos:
            raise ParameterError(
                "(eta, gamma) = (0, 1/2) is excluded: the weighted supremum of the "
                "reflecting Brownian bridge is infinite for this weight"
            )


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not 0.0 <= self.lo < self.hi <= 1.0:
            raise ValueError(f"need 0 <= lo < hi <= 1, got [{self.lo!r}, {self.hi!r}]")

    @property
    def midpoint(self):
        return 0.5 * (self.lo + self.hi)

    @property
    def length(self):
        return self.hi - self.lo


@njit(cache=True)
def _weight(eta, gamma, t):
    if t <= eta or t >= 1.0 - eta:
        return 0.0
    if gamma == 0.0:
        return 1.0
    return (t * (1.0 - t)) ** (-gamma)


@njit(cache=True)
def _interval_weight(eta, gamma, lo, hi):
    # an interval of positive length sits inside [0, eta] u [1-eta, 1]
    # only if it sits inside one of the two pieces
    if hi <= eta or lo >= 1.0 - eta:
        return 0.0
    if gamma == 0.0:
        return 1.0
    c = 0.5 * (lo + hi)
    return (c * (1.0 - c)) ** (-gamma)


def weight(params, t):
    t = float(t)
    if not 0.0 < t < 1.0:
        raise ValueError(f"weight is defined on ]0, 1[, got t={t!r}")
    return float(_weight(params.eta, params.gamma, t))


def interval_weight(params, iv):
    """Weight attached to ``iv`` when scoring it for refinement.

    Zero when ``iv`` lies in the dead zone, otherwise ``(c(1-c))^(-gamma)``
    at the midpoint ``c`` even if ``c`` itself is in the dead zone.
    """
    return float(_interval_weight(params.eta, params.gamma, iv.lo, iv.hi))
