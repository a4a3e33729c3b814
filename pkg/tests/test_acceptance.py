"""Acceptance criteria, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v -s`` (the lines are also
repeated in the terminal summary) or directly with
``python3 tests/test_acceptance.py``. The full suite takes roughly
20-25 minutes on one core; criteria 4-6 and 8 are marked ``slow``.
"""

import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from bridgesup.bench import QUANTILE_SWEEP, bench_quantile, bench_strong, estimate_order
from bridgesup.cusum import SeriesSample, critical_value, run_test
from bridgesup.quantile import QuantileRequest, compute_quantile
from bridgesup.refmath import darling_erdos_critical, kolmogorov_quantile
from bridgesup.weights import WeightParams

RESULTS = {}

# published strong-error table (mean E|S - A_n|), used as fixed references
FIGURE3 = {
    ("adaptive", 0.25): {
        5: 0.4255, 11: 0.2040, 23: 0.0865, 50: 0.0254, 108: 0.00431,
        232: 3.11e-4, 500: 9.91e-6, 1077: 8.28e-9, 2321: 1.14e-15,
    },
    ("adaptive", 0.45): {
        5: 0.8416, 11: 0.5031, 23: 0.2558, 50: 0.1089, 108: 0.0307,
        232: 0.00486, 500: 3.48e-5, 1077: 5.88e-9, 2321: 9.2e-15,
    },
    ("equidistant", 0.25): {
        5: 0.430, 10: 0.2945, 50: 0.129, 100: 0.090, 500: 0.0393,
        1000: 0.0265, 2000: 0.0187, 5000: 0.0105, 10000: 0.00657,
    },
    ("equidistant", 0.45): {
        5: 0.845, 10: 0.635, 50: 0.333, 100: 0.257, 500: 0.1385,
        1000: 0.0982, 2000: 0.0764, 5000: 0.0462, 10000: 0.0305,
    },
}
REFERENCE_Q95 = {0.25: 2.0008, 0.45: 2.9222}


def record(key, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] {key}: {detail}"
    RESULTS[key] = line
    print(line, flush=True)
    return passed


def _best_time(fn, *args, repeat=20, **kwargs):
    fn(*args, **kwargs)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args, **kwargs)
        best = min(best, time.perf_counter() - t0)
    return best


_strong_cache = {}


def _strong(engine, gamma):
    key = (engine, gamma)
    if key not in _strong_cache:
        sweep = sorted(FIGURE3[key])
        _strong_cache[key] = bench_strong(WeightParams(0, gamma), engine, sweep, replications=1000, timing=False)
    return _strong_cache[key]


def test_c1_kolmogorov_quantile():
    value = kolmogorov_quantile(0.95)
    t = _best_time(kolmogorov_quantile, 0.95)
    ok = abs(value - 1.3581) <= 5e-4 and t < 1e-3
    assert record("C1 kolmogorov quantile", ok, f"{value:.6f} (target 1.3581 +/- 5e-4), {t * 1e6:.0f} us (< 1 ms)")


def test_c2_darling_erdos():
    cases = [(100, "one-sided", 3.241), (1000, "one-sided", 3.353), (100, "as-stated", 3.637)]
    values = [darling_erdos_critical(n, 0.05, variant=v) for n, v, _ in cases]
    t = max(_best_time(darling_erdos_critical, n, 0.05, variant=v) for n, v, _ in cases)
    ok = all(abs(v - ref) <= 5e-4 for v, (_, _, ref) in zip(values, cases)) and t < 1e-3
    detail = ", ".join(f"{v}/n={n}: {x:.4f} (ref {ref})" for x, (n, v, ref) in zip(values, cases))
    assert record("C2 darling-erdos", ok, f"{detail}; {t * 1e6:.0f} us")


def _quantile_runs(gamma, truth, runs=100):
    hits, worst = 0, 0.0
    for seed in range(runs):
        t0 = time.perf_counter()
        res = compute_quantile(QuantileRequest(WeightParams(0, gamma), 0.95, 0.01, seed=seed))
        worst = max(worst, time.perf_counter() - t0)
        hits += abs(res.quantile - truth) <= 0.03
    return hits, worst


@pytest.mark.slow
def test_c3_quantile_known_law():
    hits, worst = _quantile_runs(0.0, 1.3581)
    assert record("C3 Q^ad vs Kolmogorov", hits >= 95, f"{hits}/100 within 0.03 of 1.3581 (need 95), slowest {worst:.2f} s")


@pytest.mark.slow
@pytest.mark.parametrize("gamma", [0.25, 0.45])
def test_c4_master_values(gamma):
    hits, worst = _quantile_runs(gamma, REFERENCE_Q95[gamma])
    ok = hits >= 90 and worst <= 60
    assert record(
        f"C4 Q^ad gamma={gamma}",
        ok,
        f"{hits}/100 within 0.03 of {REFERENCE_Q95[gamma]} (need 90), slowest {worst:.2f} s (<= 60 s)",
    )


@pytest.mark.slow
def test_c5a_equidistant_order():
    p = WeightParams(0, 0.25)
    recs = bench_strong(p, "equidistant", [100, 200, 500, 1000, 2000, 5000, 10000], replications=1000, timing=False)
    slope, se = estimate_order(recs)
    assert record("C5a equidistant strong order", abs(slope + 0.5) <= 0.15, f"slope {slope:.3f} +/- {se:.3f} (target -0.5 +/- 0.15)")


@pytest.mark.slow
def test_c5b_adaptive_vs_equidistant():
    ad = {int(r.sweep): r.error for r in _strong("adaptive", 0.45)}[1077]
    eq = {int(r.sweep): r.error for r in _strong("equidistant", 0.45)}[1000]
    ratio = eq / ad if ad > 0 else float("inf")
    assert record(
        "C5b adaptive/equidistant at n~1e3, gamma=0.45",
        ratio >= 1e4,
        f"equidistant {eq:.3g} / adaptive {ad:.3g} = {ratio:.3g} (need >= 1e4)",
    )


@pytest.mark.slow
def test_c5c_figure3_rows():
    misses = []
    total = 0
    for key, rows in FIGURE3.items():
        for rec in _strong(*key):
            ref = rows[int(rec.sweep)]
            total += 1
            ratio = rec.error / ref
            if not 1 / 3 <= ratio <= 3:
                misses.append(f"{key[0]} g={key[1]} n={int(rec.sweep)}: {rec.error:.3g} vs {ref:.3g}")
    detail = f"{total - len(misses)}/{total} rows within factor 3"
    if misses:
        detail += "; off: " + "; ".join(misses)
    assert record("C5c published strong-error rows", not misses, detail)


_quantile_bench = {}


def _qbench(engine):
    if engine not in _quantile_bench:
        t0 = time.perf_counter()
        recs = bench_quantile(WeightParams(0, 0.25), engine, QUANTILE_SWEEP, REFERENCE_Q95[0.25], replications=100)
        _quantile_bench[engine] = (recs, time.perf_counter() - t0)
    return _quantile_bench[engine]


@pytest.mark.slow
@pytest.mark.parametrize("engine,target,tol", [("adaptive", -0.5, 0.15), ("equidistant", -0.25, 0.1)])
def test_c6_quantile_orders(engine, target, tol):
    recs, elapsed = _qbench(engine)
    slope, se = estimate_order(recs, "time")
    total = sum(t for _, t in _quantile_bench.values())
    ok = abs(slope - target) <= tol and total <= 1800
    assert record(
        f"C6 {engine} error-vs-time order",
        ok,
        f"slope {slope:.3f} +/- {se:.3f} (target {target} +/- {tol}), eps in [0.01, 0.64], "
        f"this engine {elapsed:.0f} s, bench total so far {total:.0f} s (<= 1800 s)",
    )


PROPERTY_TESTS = [
    "tests/test_supapprox.py::TestAdaptiveInvariants::test_partition_and_maximum",
    "tests/test_score.py::TestQuadratureOracle",
    "tests/test_quantile.py::TestOrderStatistic",
    "tests/test_quantile.py::TestBinomialCI",
    "tests/test_cusum.py::TestStatistic::test_shift_and_scale",
    "tests/test_cusum.py::TestStatistic::test_against_naive",
    "tests/test_sampler.py::TestMapReplications",
    "tests/test_quantile.py::TestComputeQuantile::test_reproducible_across_workers",
    "tests/test_quantile.py::TestPrecompute::test_worker_invariance",
    "tests/test_bench.py::TestStrong::test_worker_invariant_bytes",
    "tests/test_cli.py::TestQuantile::test_byte_identical_and_worker_invariant",
    "tests/test_cli.py::TestBench::test_worker_invariant_csv",
]


def test_c7_property_suites():
    root = Path(__file__).resolve().parent.parent
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *PROPERTY_TESTS],
        cwd=root,
        capture_output=True,
        text=True,
    )
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr.strip()
    assert record("C7 property suites", proc.returncode == 0, summary)


@pytest.mark.slow
def test_c8_level_under_null():
    p = WeightParams(0, 0.25)
    c = critical_value(p, 0.05, "monte-carlo", epsilon=0.01, seed=0)
    rng = np.random.default_rng(20240605)
    trials, rejects = 2000, 0
    for _ in range(trials):
        x = rng.standard_normal(10**4)
        rejects += run_test(SeriesSample(x, sigma=1.0), p, critical=c).reject
    rate = rejects / trials
    assert record("C8 level under H0", abs(rate - 0.05) <= 0.015, f"rate {rate:.4f} (target 0.05 +/- 0.015), c = {c:.4f}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s", *sys.argv[1:]]))
