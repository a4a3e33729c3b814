"""Error-versus-cost experiments for both engines.

``bench_strong`` measures the pathwise error ``E|S - A_n|`` where ``S`` is
replaced by the same engine run ten times finer on the same trajectory.
``bench_quantile`` measures ``E|F^-1(q) - Q_eps|`` against a supplied
reference quantile. Both report 95% normal-approximation half-widths.
"""

import csv
import io
import math
import time
from dataclasses import dataclass, fields

import numpy as np
from numpy.random import SeedSequence
from scipy.stats import linregress

from .quantile import QuantileRequest, compute_quantile
from .sampler import map_replications, replication_normals
from .supapprox import batch_kernel, nested_kernel

CSV_HEADER = ("sweep", "engine", "eta", "gamma", "q", "error", "error_hw", "time_sec", "time_hw")
Z95 = 1.959963984540054

# timing runs draw from a stream disjoint from the error runs
TIMING_STREAM = 1

STRONG_SWEEPS = {
    "adaptive": (5, 11, 23, 50, 108, 232, 500, 1077, 2321),
    "equidistant": (5, 10, 50, 100, 500, 1000, 2000, 5000, 10000),
}
QUANTILE_SWEEP = tuple(0.64 * 0.8**i for i in range(19)) + (0.01,)  # 0.64 down to 0.01


@dataclass(frozen=True)
class BenchRecord:
    sweep: float
    engine: str
    eta: float
    gamma: float
    q: float | None
    error: float
    error_hw: float
    time_sec: float | None
    time_hw: float | None


def _mean_hw(values):
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return float(values.mean()), 0.0
    return float(values.mean()), float(Z95 * values.std(ddof=1) / math.sqrt(values.size))


def _check_sweep(sweep):
    sweep = [int(n) for n in sweep]
    if not sweep:
        raise ValueError("empty sweep")
    if any(b <= a for a, b in zip(sweep, sweep[1:])):
        raise ValueError("sweep must be strictly increasing")
    return sweep


def _time_engine(params, engine, n, replications, seed, workers, batches):
    """Mean wall time per call of ``A_n`` and its half-width over batches.

    Normal generation happens outside the timed region.
    """
    per_rep, kernel = batch_kernel(params, engine, n)
    kernel(replication_normals(seed, TIMING_STREAM, 0, 1, per_rep), 0)  # compile / warm up
    bounds = np.linspace(0, replications, min(batches, replications) + 1).astype(int)
    per_call = []
    for start, stop in zip(bounds[:-1], bounds[1:]):
        normals = replication_normals(seed, TIMING_STREAM, start, stop, per_rep)
        t0 = time.perf_counter()
        kernel(normals, start)
        per_call.append((time.perf_counter() - t0) / (stop - start))
    return _mean_hw(per_call)


def strong_errors(params, engine, sweep, replications=1000, reference_multiplier=10, seed=0, workers=None):
    """Per-replication errors, shape ``(replications, len(sweep))``.

    Every column of one row is measured against that row's own reference
    value (same trajectory, ``reference_multiplier * max(sweep)`` points).
    """
    sweep = _check_sweep(sweep)
    n_ref = reference_multiplier * sweep[-1]
    if engine == "adaptive":
        per_rep, kernel = batch_kernel(params, "adaptive", n_ref, checkpoints=sweep)
    elif engine == "equidistant":
        per_rep, kernel = nested_kernel(params, n_ref, sweep + [n_ref])
    else:
        raise ValueError(f"unknown engine {engine!r}")
    maxima = map_replications(kernel, seed, 0, replications, per_rep, workers)
    # columns are in ascending grid order with the reference last
    return np.abs(maxima[:, -1:] - maxima[:, :-1])


def bench_strong(
    params,
    engine,
    sweep,
    replications=1000,
    reference_multiplier=10,
    seed=0,
    workers=None,
    timing=True,
    timing_batches=10,
):
    sweep = _check_sweep(sweep)
    errors = strong_errors(params, engine, sweep, replications, reference_multiplier, seed, workers)
    records = []
    for j, n in enumerate(sweep):
        err, err_hw = _mean_hw(errors[:, j])
        t = t_hw = None
        if timing:
            t, t_hw = _time_engine(params, engine, n, replications, seed, workers, timing_batches)
        records.append(BenchRecord(float(n), engine, params.eta, params.gamma, None, err, err_hw, t, t_hw))
    return records


def replication_seed(seed, r):
    return int(SeedSequence([seed, r]).generate_state(1, np.uint64)[0])


def bench_quantile(
    params,
    engine,
    epsilons,
    reference,
    replications=100,
    q=0.95,
    seed=0,
    workers=None,
    progress=None,
):
    """Error of the quantile algorithm against ``reference`` for each tolerance.

    Replication ``r`` uses the seed derived from ``(seed, r)`` at every
    tolerance. ``progress``, if given, is called with each finished record.
    """
    epsilons = sorted(float(e) for e in epsilons)
    if not epsilons:
        raise ValueError("empty sweep")
    records = []
    for eps in epsilons:
        errs, times = [], []
        for r in range(replications):
            req = QuantileRequest(params, q, eps, replication_seed(seed, r), engine, workers=workers)
            res = compute_quantile(req)
            errs.append(abs(res.quantile - reference))
            times.append(res.elapsed)
        err, err_hw = _mean_hw(errs)
        t, t_hw = _mean_hw(times)
        rec = BenchRecord(eps, engine, params.eta, params.gamma, q, err, err_hw, t, t_hw)
        records.append(rec)
        if progress is not None:
            progress(rec)
    return records


def estimate_order(records, against="sweep"):
    """Least-squares slope of ``log(error)`` on ``log(sweep)`` or ``log(time)``.

    Returns ``(slope, stderr)``.
    """
    if against not in ("sweep", "time"):
        raise ValueError("against must be 'sweep' or 'time'")
    if len(records) < 4:
        raise ValueError(f"need at least 4 records, got {len(records)}")
    x = np.array([r.sweep if against == "sweep" else r.time_sec for r in records], dtype=float)
    y = np.array([r.error for r in records], dtype=float)
    if not (np.all(x > 0) and np.all(y > 0)):
        raise ValueError("errors and sweep/time values must be positive")
    if np.ptp(np.log(x)) == 0:
        raise ValueError("degenerate sweep: all abscissae coincide")
    fit = linregress(np.log(x), np.log(y))
    return float(fit.slope), float(fit.stderr)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return repr(float(value))


def emit_csv(records, fh=None):
    """Write records with the fixed header; returns the text if ``fh`` is None."""
    out = io.StringIO() if fh is None else fh
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in sorted(records, key=lambda r: r.sweep):
        writer.writerow([_fmt(getattr(rec, name)) for name in CSV_HEADER])
    if fh is None:
        return out.getvalue()
    return None


def parse_csv(fh):
    if isinstance(fh, str):
        fh = io.StringIO(fh)
    reader = csv.reader(fh)
    header = tuple(next(reader))
    if header != CSV_HEADER:
        raise ValueError(f"unexpected header {header!r}")
    kinds = {f.name: f.type for f in fields(BenchRecord)}
    records = []
    for row in reader:
        values = {}
        for name, cell in zip(CSV_HEADER, row):
            if kinds[name] is str:
                values[name] = cell
            else:
                values[name] = None if cell == "" else float(cell)
        records.append(BenchRecord(**values))
    return records
