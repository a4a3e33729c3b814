import io

import pytest

from bridgesup.bench import (
    CSV_HEADER,
    BenchRecord,
    bench_quantile,
    bench_strong,
    emit_csv,
    estimate_order,
    parse_csv,
    replication_seed,
    strong_errors,
)
from bridgesup.sampler import replication_normals
from bridgesup.supapprox import adaptive_from_normals, batch_kernel
from bridgesup.weights import WeightParams


def _record(sweep, error, t=None):
    return BenchRecord(sweep, "adaptive", 0.0, 0.25, None, error, 0.1 * error, t, None if t is None else 0.0)


class TestCsv:
    def test_header(self):
        text = emit_csv([_record(10.0, 0.5)])
        assert text.splitlines()[0] == ",".join(CSV_HEADER)
        assert text.splitlines()[0] == "sweep,engine,eta,gamma,q,error,error_hw,time_sec,time_hw"

    def test_round_trip(self):
        records = [
            _record(10.0, 0.1234567890123456789, 1e-5),
            _record(5.0, 1 / 3),
            BenchRecord(0.01, "equidistant", 0.1, 0.45, 0.95, 2.0**-60, 0.0, 3.5, 0.25),
        ]
        back = parse_csv(emit_csv(records))
        assert back == sorted(records, key=lambda r: r.sweep)

    def test_file_handle(self):
        fh = io.StringIO()
        assert emit_csv([_record(1.0, 1.0)], fh) is None
        fh.seek(0)
        assert parse_csv(fh) == [_record(1.0, 1.0)]

    def test_bad_header(self):
        with pytest.raises(ValueError):
            parse_csv("a,b\n1,2\n")


class TestEstimateOrder:
    def test_exact_power_law(self):
        records = [_record(n, 3.0 * n**-0.5, 1e-6 * n) for n in (10, 100, 1000, 10000)]
        slope, stderr = estimate_order(records)
        assert slope == pytest.approx(-0.5, abs=1e-12) and stderr < 1e-10
        assert estimate_order(records, "time")[0] == pytest.approx(-0.5, abs=1e-12)

    def test_errors(self):
        with pytest.raises(ValueError):
            estimate_order([_record(n, 1.0) for n in (1, 2, 3)])
        with pytest.raises(ValueError):
            estimate_order([_record(n, 0.0) for n in (1, 2, 3, 4)])
        with pytest.raises(ValueError):
            estimate_order([_record(2.0, 1.0)] * 4)
        with pytest.raises(ValueError):
            estimate_order([_record(n, 1.0) for n in (1, 2, 3, 4)], "other")


class TestStrong:
    def test_coupled_reference(self):
        # every column is measured against the same long run of the same path
        p = WeightParams(0, 0.25)
        sweep = [5, 20, 40]
        errors = strong_errors(p, "adaptive", sweep, replications=3, reference_multiplier=10, seed=2)
        per_rep, _ = batch_kernel(p, "adaptive", 400)
        normals = replication_normals(2, 0, 0, 3, per_rep)
        for r in range(3):
            ref = adaptive_from_normals(p, normals[r], 400)
            for j, n in enumerate(sweep):
                assert errors[r, j] == abs(ref - adaptive_from_normals(p, normals[r], n))

    def test_error_decreases(self):
        recs = bench_strong(WeightParams(0, 0.45), "adaptive", [5, 23, 108], replications=200, timing=False)
        errs = [r.error for r in recs]
        assert errs[0] > errs[1] > errs[2]
        assert all(r.time_sec is None for r in recs)

    def test_equidistant_order_half(self):
        recs = bench_strong(WeightParams(), "equidistant", [10, 50, 100, 500], replications=300, timing=False)
        assert estimate_order(recs)[0] == pytest.approx(-0.5, abs=0.15)

    def test_worker_invariant_bytes(self):
        p = WeightParams(0.1, 0.3)
        texts = {
            emit_csv(bench_strong(p, "adaptive", [5, 11, 23], replications=50, timing=False, workers=w))
            for w in (1, 3)
        }
        assert len(texts) == 1

    def test_timing_columns(self):
        recs = bench_strong(WeightParams(), "adaptive", [5, 50], replications=20, timing_batches=4)
        assert all(r.time_sec > 0 and r.time_hw >= 0 for r in recs)

    @pytest.mark.parametrize("sweep", [[], [10, 5], [5, 5]])
    def test_bad_sweep(self, sweep):
        with pytest.raises(ValueError):
            bench_strong(WeightParams(), "adaptive", sweep, replications=2, timing=False)

    def test_bad_engine(self):
        with pytest.raises(ValueError):
            strong_errors(WeightParams(), "other", [5], replications=2)


class TestQuantileBench:
    def test_small_run(self):
        seen = []
        recs = bench_quantile(WeightParams(), "adaptive", [0.3, 0.15], 1.3581, replications=5, progress=seen.append)
        assert [r.sweep for r in recs] == [0.15, 0.3]
        assert seen == recs
        assert all(r.q == 0.95 and r.error >= 0 and r.time_sec > 0 for r in recs)

    def test_replication_seeds(self):
        seeds = [replication_seed(0, r) for r in range(100)]
        assert len(set(seeds)) == 100
        assert replication_seed(0, 3) == replication_seed(0, 3) != replication_seed(1, 3)

    def test_empty(self):
        with pytest.raises(ValueError):
            bench_quantile(WeightParams(), "adaptive", [], 1.0)
