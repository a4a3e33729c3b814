"""Strong approximation of ``sup_t w(t) |B(t)|`` for a Brownian bridge ``B``.

Two engines:

* adaptive: greedy midpoint refinement. The subinterval with the largest
  score is split next, and scores are never refreshed after insertion.
  ``n`` steps use ``n - 1`` bridge evaluations.
* equidistant: the maximum of ``w(k/n) |B(k/n)|`` over ``k = 1..n-1``,
  with the path simulated left to right.

Each engine has a numba kernel that consumes a pre-drawn array of standard
normals. The public functions draw those normals from a
:class:`~bridgesup.sampler.RandomStream`. :class:`AdaptiveRun` is a
step-by-step version with an inspectable state, intended for diagnostics
and tests.
"""

import heapq
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .score import MIN_WIDTH, _score
from .weights import _weight

ENGINES = ("adaptive", "equidistant")

# Heap key of intervals at or below MIN_WIDTH. Their score is 0, but they
# are terminal: ordering them below every genuine score (which is >= 0,
# possibly 0 by underflow) means they are never split.
TERMINAL_KEY = -1.0


# Heap layout: position p holds score hs[p], insertion number hq[p] and the
# slot hid[p] whose interval data live in lo/hi/xs/ys. Keeping the keys
# inline avoids an indirect load per comparison. Order: larger score
# first, earlier insertion on ties.


@njit(cache=True)
def _replace_top(hs, hq, hid, size, s, q, slot):
    pos = 0
    while True:
        child = 2 * pos + 1
        if child >= size:
            break
        cs = hs[child]
        cq = hq[child]
        right = child + 1
        if right < size:
            rs = hs[right]
            if rs > cs or (rs == cs and hq[right] < cq):
                child = right
                cs = rs
                cq = hq[right]
        if cs > s or (cs == s and cq < q):
            hs[pos] = cs
            hq[pos] = cq
            hid[pos] = hid[child]
            pos = child
        else:
            break
    hs[pos] = s
    hq[pos] = q
    hid[pos] = slot


@njit(cache=True)
def _push(hs, hq, hid, size, s, q, slot):
    pos = size
    while pos > 0:
        parent = (pos - 1) >> 1
        ps = hs[parent]
        if s > ps or (s == ps and q < hq[parent]):
            hs[pos] = ps
            hq[pos] = hq[parent]
            hid[pos] = hid[parent]
            pos = parent
        else:
            break
    hs[pos] = s
    hq[pos] = q
    hid[pos] = slot


@njit(cache=True)
def _adaptive_path(eta, gamma, normals, checkpoints, out, lo, hi, xs, ys, hs, hq, hid):
    n = checkpoints[-1]
    m = 0.0
    lo[0] = 0.0
    hi[0] = 1.0
    xs[0] = 0.0
    ys[0] = 0.0
    hs[0] = _score(eta, gamma, 0.0, 1.0, 0.0, 0.0, m, True)
    hq[0] = 0
    hid[0] = 0
    size = 1
    cp = 0
    while cp < checkpoints.size and checkpoints[cp] == 1:
        out[cp] = m
        cp += 1
    for k in range(2, n + 1):
        top = hid[0]
        left, right = lo[top], hi[top]
        x, y = xs[top], ys[top]
        c = 0.5 * (left + right)
        z = 0.5 * (x + y) + 0.5 * math.sqrt(right - left) * normals[k - 2]
        wz = _weight(eta, gamma, c) * abs(z)
        if wz > m:
            m = wz

        # left child takes over the popped slot, right child gets slot k-1
        hi[top] = c
        ys[top] = z
        s_left = _score(eta, gamma, left, c, x, z, m, True) if c - left > MIN_WIDTH else TERMINAL_KEY
        _replace_top(hs, hq, hid, size, s_left, 2 * k - 3, top)

        new = k - 1
        lo[new] = c
        hi[new] = right
        xs[new] = z
        ys[new] = y
        s_right = _score(eta, gamma, c, right, z, y, m, True) if right - c > MIN_WIDTH else TERMINAL_KEY
        _push(hs, hq, hid, size, s_right, 2 * k - 2, new)
        size += 1

        while cp < checkpoints.size and checkpoints[cp] == k:
            out[cp] = m
            cp += 1


@njit(cache=True, nogil=True)
def _adaptive_batch(eta, gamma, normals, checkpoints):
    reps = normals.shape[0]
    n = checkpoints[-1]
    out = np.empty((reps, checkpoints.size))
    lo = np.empty(n)
    hi = np.empty(n)
    xs = np.empty(n)
    ys = np.empty(n)
    hs = np.empty(n)
    hq = np.empty(n, dtype=np.int64)
    hid = np.empty(n, dtype=np.int64)
    for r in range(reps):
        _adaptive_path(eta, gamma, normals[r], checkpoints, out[r], lo, hi, xs, ys, hs, hq, hid)
    return out


@njit(cache=True)
def _equidistant_values(eta, gamma, normals, n, vals):
    # vals[k-1] = w(k/n) |B(k/n)|, path drawn forward from B(0) = 0
    b = 0.0
    for k in range(1, n):
        ratio = (n - k) / (n - k + 1.0)
        b = b * ratio + math.sqrt(ratio / n) * normals[k - 1]
        vals[k - 1] = _weight(eta, gamma, k / n) * abs(b)


@njit(cache=True, nogil=True)
def _equidistant_batch(eta, gamma, normals, n):
    reps = normals.shape[0]
    out = np.empty((reps, 1))
    vals = np.empty(max(n - 1, 1))
    for r in range(reps):
        _equidistant_values(eta, gamma, normals[r], n, vals)
        best = 0.0
        for i in range(n - 1):
            if vals[i] > best:
                best = vals[i]
        out[r, 0] = best
    return out


@njit(cache=True, nogil=True)
def _equidistant_nested_batch(eta, gamma, normals, n_fine, grids):
    # discrete maxima over the coarse grids {k/g}, all nested in {k/n_fine}
    reps = normals.shape[0]
    out = np.empty((reps, grids.size))
    vals = np.empty(n_fine - 1)
    for r in range(reps):
        _equidistant_values(eta, gamma, normals[r], n_fine, vals)
        for j in range(grids.size):
            step = n_fine // grids[j]
            best = 0.0
            for i in range(step - 1, n_fine - 1, step):
                if vals[i] > best:
                    best = vals[i]
            out[r, j] = best
    return out


def _checkpoint_array(checkpoints, n):
    steps = sorted({int(s) for s in checkpoints} | {int(n)})
    if steps[0] < 1:
        raise ValueError("checkpoint steps must be >= 1")
    if steps[-1] != n:
        raise ValueError(f"checkpoints beyond n={n} requested")
    return np.asarray(steps, dtype=np.int64)


def adaptive_from_normals(params, normals, n, checkpoints=()):
    """Adaptive maxima of one path driven by ``normals`` (length >= n - 1).

    Returns an array of ``m`` values at the sorted union of ``checkpoints``
    and ``n``.
    """
    params.require_bounded()
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    steps = _checkpoint_array(checkpoints, n)
    normals = np.ascontiguousarray(normals, dtype=np.float64)[: n - 1]
    if normals.size < n - 1:
        raise ValueError(f"need {n - 1} normals, got {normals.size}")
    return _adaptive_batch(params.eta, params.gamma, normals.reshape(1, -1), steps)[0]


def adaptive_sup(params, rs, n, checkpoints=None):
    """``A^ad_n``: the discrete maximum after ``n`` greedy steps.

    Draws exactly ``n - 1`` normals from ``rs``. With ``checkpoints``, also
    returns a dict mapping each requested step to the maximum reached at
    that step of the same trajectory.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    normals = rs.normals(n - 1)
    values = adaptive_from_normals(params, normals, n, checkpoints or ())
    if checkpoints is None:
        return float(values[-1])
    steps = _checkpoint_array(checkpoints, n)
    table = dict(zip(steps.tolist(), values.tolist()))
    return float(values[-1]), {int(s): table[int(s)] for s in checkpoints}


def equidistant_from_normals(params, normals, n):
    params.require_bounded()
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n!r}")
    normals = np.ascontiguousarray(normals, dtype=np.float64)[: n - 1]
    if normals.size < n - 1:
        raise ValueError(f"need {n - 1} normals, got {normals.size}")
    return float(_equidistant_batch(params.eta, params.gamma, normals.reshape(1, -1), n)[0, 0])


def equidistant_sup(params, rs, n):
    """``A^eq_n``: ``max_k w(k/n) |B(k/n)|`` on a path drawn with ``n - 1`` normals."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n!r}")
    return equidistant_from_normals(params, rs.normals(n - 1), n)


def batch_kernel(params, engine, n, checkpoints=()):
    """Return ``(per_rep, kernel)`` for use with :func:`sampler.map_replications`.

    For the adaptive engine the kernel yields one column per checkpoint
    (plus ``n``); for the equidistant engine a single column.
    """
    params.require_bounded()
    eta, gamma = params.eta, params.gamma
    if engine == "adaptive":
        steps = _checkpoint_array(checkpoints, n)
        return n - 1, lambda normals, start: _adaptive_batch(eta, gamma, normals, steps)
    if engine == "equidistant":
        if checkpoints:
            raise ValueError("the equidistant engine has no checkpoints; use nested grids")
        if n < 2:
            raise ValueError(f"n must be >= 2, got {n!r}")
        return n - 1, lambda normals, start: _equidistant_batch(eta, gamma, normals, n)
    raise ValueError(f"unknown engine {engine!r}; use one of {ENGINES}")


def nested_kernel(params, n_fine, grids):
    params.require_bounded()
    grids = np.asarray(sorted(int(g) for g in grids), dtype=np.int64)
    bad = [int(g) for g in grids if g < 2 or n_fine % g]
    if bad:
        raise ValueError(f"grid sizes {bad} do not divide the reference grid {n_fine}")
    eta, gamma = params.eta, params.gamma
    return n_fine - 1, lambda normals, start: _equidistant_nested_batch(eta, gamma, normals, n_fine, grids)


@dataclass(frozen=True)
class ScoredInterval:
    lo: float
    hi: float
    x: float
    y: float
    s: float


class AdaptiveRun:
    """Step-by-step adaptive refinement with inspectable state.

    ``queue`` holds ``(-s, insertion, ScoredInterval)`` tuples, ``m`` is
    the current discrete maximum and ``log`` records every evaluation as
    ``(c, B(c), w(c) |B(c)|)``.
    """

    def __init__(self, params, rs):
        params.require_bounded()
        self.params = params
        self.rs = rs
        self.m = 0.0
        self.steps = 1
        self.log = []
        self._counter = 0
        self.queue = []
        self._push(0.0, 1.0, 0.0, 0.0)

    def _push(self, lo, hi, x, y):
        p = self.params
        if hi - lo > MIN_WIDTH:
            s = float(_score(p.eta, p.gamma, lo, hi, x, y, self.m, True))
            key = s
        else:
            s, key = 0.0, TERMINAL_KEY
        heapq.heappush(self.queue, (-key, self._counter, ScoredInterval(lo, hi, x, y, s)))
        self._counter += 1

    def step(self):
        _, _, iv = heapq.heappop(self.queue)
        c = 0.5 * (iv.lo + iv.hi)
        z = 0.5 * (iv.x + iv.y) + 0.5 * math.sqrt(iv.hi - iv.lo) * self.rs.normal()
        wz = float(_weight(self.params.eta, self.params.gamma, c)) * abs(z)
        self.m = max(self.m, wz)
        self.log.append((c, z, wz))
        self._push(iv.lo, c, iv.x, z)
        self._push(c, iv.hi, z, iv.y)
        self.steps += 1
        return self.m

    def run(self, n):
        while self.steps < n:
            self.step()
        return self.m

    def intervals(self):
        """Current partition, sorted by left endpoint."""
        return sorted((entry[2] for entry in self.queue), key=lambda iv: iv.lo)
