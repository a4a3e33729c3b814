"""Reproducible normal streams and exact Brownian-bridge conditionals.

A stream is identified by ``(seed, stream)``; its Philox key is derived
through :class:`numpy.random.SeedSequence`, so distinct pairs give
independent sequences. Normals are produced by the inverse normal CDF
applied to open-interval uniforms built from the raw 64-bit output.

Monte Carlo replications do not get a generator each. Replication ``j``
reads the raw words ``[j * stride, j * stride + d)`` of its stream, where
``d`` is the number of normals one replication consumes and ``stride`` is
``d`` rounded up to a multiple of four (Philox emits 4 words per counter
step). Any block of replications can therefore be generated on its own by
advancing the counter, and results do not depend on how the replications
are split across workers.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numpy.random import Philox, SeedSequence
from scipy.special import ndtri

_U64_MAX = 2**64 - 1

# normals generated per chunk when running replications
CHUNK_NORMALS = 1 << 21


def _check_seed(value, name):
    if int(value) != value or not 0 <= value <= _U64_MAX:
        raise ValueError(f"{name} must be an integer in [0, 2**64), got {value!r}")
    return int(value)


def _philox_key(seed, stream):
    return SeedSequence([seed, stream]).generate_state(2, np.uint64)


def _raw_to_normal(raw):
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(u)


def _stride(per_rep):
    return 4 * ((per_rep + 3) // 4)


class RandomStream:
    """Sequential normal variates from the stream ``(seed, stream)``.

    Not safe for concurrent draws; create one stream per worker.
    """

    def __init__(self, seed, stream=0):
        self.seed = _check_seed(seed, "seed")
        self.stream = _check_seed(stream, "stream")
        self._bitgen = Philox(key=_philox_key(self.seed, self.stream))

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, stream={self.stream})"

    def normals(self, size):
        return _raw_to_normal(self._bitgen.random_raw(size))

    def normal(self):
        return float(self.normals(1)[0])


def sample_std_normal(rs):
    return rs.normal()


def replication_normals(seed, stream, start, stop, per_rep):
    """Normals of replications ``start..stop-1``, shape ``(stop-start, per_rep)``.

    Row ``j - start`` equals the first ``per_rep`` draws of replication ``j``;
    replication 0 coincides with ``RandomStream(seed, stream).normals(per_rep)``.
    """
    count = stop - start
    if count < 0:
        raise ValueError("stop must not precede start")
    stride = _stride(per_rep)
    if per_rep == 0 or count == 0:
        return np.empty((count, per_rep))
    bitgen = Philox(key=_philox_key(_check_seed(seed, "seed"), _check_seed(stream, "stream")))
    bitgen.advance(int(start) * stride // 4)
    raw = bitgen.random_raw(count * stride).reshape(count, stride)
    return _raw_to_normal(raw[:, :per_rep])


def default_workers():
    return os.cpu_count() or 1


def map_replications(kernel, seed, stream, count, per_rep, workers=None, chunk=None):
    """Run ``kernel(normals_block, start)`` over all ``count`` replications.

    The kernel returns one row of results per replication; rows are stacked
    in replication order. Chunk boundaries depend only on ``per_rep``, never
    on ``workers``.
    """
    if chunk is None:
        chunk = max(1, CHUNK_NORMALS // max(_stride(per_rep), 1))
    starts = list(range(0, count, chunk))

    def run(start):
        stop = min(start + chunk, count)
        return kernel(replication_normals(seed, stream, start, stop, per_rep), start)

    workers = workers or default_workers()
    if workers == 1 or len(starts) <= 1:
        parts = [run(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, starts))
    if not parts:
        return np.empty((0,))
    return np.concatenate(parts, axis=0)


def bridge_midpoint(rs, iv, x, y):
    """Draw ``B(c)`` at the midpoint of ``iv`` given ``B(lo)=x``, ``B(hi)=y``."""
    return 0.5 * (x + y) + 0.5 * math.sqrt(iv.hi - iv.lo) * rs.normal()


def bridge_forward(rs, s, t, x):
    """Draw ``B(t)`` given ``B(s)=x`` for a bridge pinned at ``B(1)=0``."""
    if not 0.0 <= s < t:
        raise ValueError(f"need 0 <= s < t, got s={s!r}, t={t!r}")
    if t >= 1.0:
        raise ValueError("t must be < 1; the bridge is pinned at B(1) = 0")
    ratio = (1.0 - t) / (1.0 - s)
    return x * ratio + math.sqrt((t - s) * ratio) * rs.normal()
