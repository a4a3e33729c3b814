"""Command-line interface: ``bridgesup {quantile,critical-value,test,bench}``.

Exit codes: 0 success, 2 precompute divergence, 64 usage or invalid
parameters, 65 bad input data, 66 output I/O failure.
"""

import argparse
import json
import math
import os
import sys
from pathlib import Path

from .bench import QUANTILE_SWEEP, STRONG_SWEEPS, bench_quantile, bench_strong, emit_csv, estimate_order
from .calibration import write_table
from .cusum import (
    CRITICAL_SOURCES,
    DataError,
    SeriesSample,
    check_source,
    critical_value,
    read_series,
    run_test,
)
from .quantile import PrecomputeDivergence, QuantileRequest, compute_quantile
from .refmath import DARLING_ERDOS_VARIANTS, kolmogorov_quantile
from .sampler import default_workers
from .supapprox import ENGINES
from .weights import ParameterError, WeightParams

EX_DIVERGENCE = 2
EX_USAGE = 64
EX_DATAERR = 65
EX_IOERR = 66

OUTPUT_DIR_ENV = "BRIDGESUP_OUTPUT_DIR"

# 0.95-quantiles used as references by ``bench quantile`` when none is given
REFERENCE_QUANTILES = {(0.0, 0.25): 2.0008, (0.0, 0.45): 2.9222}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _float(text):
    value = float(text)
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return value


def _int_list(text):
    items = [s for s in text.split(",") if s.strip()]
    if not items:
        raise argparse.ArgumentTypeError("empty sweep")
    return [int(s) for s in items]


def _float_list(text):
    items = [s for s in text.split(",") if s.strip()]
    if not items:
        raise argparse.ArgumentTypeError("empty sweep")
    return [_float(s) for s in items]


def _add_weight(p):
    p.add_argument("--eta", type=_float, default=0.0, help="trimming eta in [0, 1/2[ (default 0)")
    p.add_argument("--gamma", type=_float, default=0.0, help="weight exponent gamma in [0, 1/2] (default 0)")


def _add_run(p):
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument(
        "--workers",
        type=_positive_int,
        default=None,
        help="worker threads (default: available CPUs); results do not depend on it",
    )


def build_parser():
    parser = _Parser(prog="bridgesup", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("quantile", help="Monte Carlo quantile of sup w|B|")
    _add_weight(p)
    p.add_argument("--q", type=_float, default=0.95, help="quantile level in ]0, 1[ (default 0.95)")
    p.add_argument("--epsilon", type=_float, default=0.01, help="error tolerance (default 0.01)")
    p.add_argument("--engine", choices=ENGINES, default="adaptive", help="approximation engine")
    p.add_argument("--ci-level", type=_float, default=0.95, help="confidence level of the interval")
    p.add_argument("--no-timing", action="store_true", help="report elapsed_sec as null (byte-stable output)")
    _add_run(p)

    p = sub.add_parser("critical-value", help="critical value of the CUSUM test")
    _add_weight(p)
    p.add_argument("--alpha", type=_float, default=0.05, help="test level (default 0.05)")
    p.add_argument(
        "--critical-source",
        "--source",
        dest="source",
        choices=CRITICAL_SOURCES,
        default="monte-carlo",
        help="how c is obtained",
    )
    p.add_argument("--n", type=int, default=None, help="sample size (darling-erdos only)")
    p.add_argument("--sigma", type=_float, default=1.0, help="noise standard deviation (default 1)")
    p.add_argument("--epsilon", type=_float, default=0.01, help="tolerance for the monte-carlo source")
    p.add_argument("--variant", choices=DARLING_ERDOS_VARIANTS, default="as-stated", help="darling-erdos form")
    _add_run(p)

    p = sub.add_parser("test", help="weighted CUSUM change-point test on a data file")
    p.add_argument("input", help="text file with one number per line, or CSV with --column")
    p.add_argument("--column", default=None, help="CSV column holding the observations")
    _add_weight(p)
    p.add_argument("--alpha", type=_float, default=0.05, help="test level (default 0.05)")
    p.add_argument(
        "--sigma",
        type=_float,
        default=None,
        help="known noise standard deviation; if omitted a first-difference estimate is used",
    )
    p.add_argument(
        "--critical-source",
        "--source",
        dest="source",
        choices=CRITICAL_SOURCES,
        default="monte-carlo",
        help="how c is obtained",
    )
    p.add_argument("--critical-value", type=_float, default=None, help="precomputed c on the data scale")
    p.add_argument("--epsilon", type=_float, default=0.01, help="tolerance for the monte-carlo source")
    p.add_argument("--variant", choices=DARLING_ERDOS_VARIANTS, default="as-stated", help="darling-erdos form")
    p.add_argument("--values", action="store_true", help="include the per-k weighted values")
    _add_run(p)

    p = sub.add_parser("bench", help="error-versus-cost experiments (CSV output)")
    bsub = p.add_subparsers(dest="bench", required=True, metavar="BENCH")

    b = bsub.add_parser("strong", help="pathwise error E|S - A_n| against n")
    _add_weight(b)
    b.add_argument("--engine", choices=ENGINES, required=True, help="approximation engine")
    b.add_argument("--sweep", type=_int_list, default=None, help="comma-separated n values (default: built-in grid)")
    b.add_argument("--replications", type=_positive_int, default=1000, help="trajectories (default 1000)")
    b.add_argument(
        "--reference-multiplier",
        type=_positive_int,
        default=10,
        help="reference run length as a multiple of the largest n (default 10)",
    )
    b.add_argument("--no-timing", action="store_true", help="skip timing; time columns are left blank")
    b.add_argument("--output-dir", default=None, help=f"output directory (default ${OUTPUT_DIR_ENV} or .)")
    b.add_argument(
        "--write-calibration",
        default=None,
        metavar="PATH",
        help="also merge the curve into an equidistant calibration table at PATH",
    )
    _add_run(b)

    b = bsub.add_parser("quantile", help="quantile error E|F^-1(q) - Q| against epsilon")
    _add_weight(b)
    b.add_argument("--engine", choices=ENGINES, required=True, help="approximation engine")
    b.add_argument(
        "--epsilons", type=_float_list, default=None, help="comma-separated tolerances (default 0.64 * 0.8^i down to 0.01)"
    )
    b.add_argument("--replications", type=_positive_int, default=100, help="runs per tolerance (default 100)")
    b.add_argument("--q", type=_float, default=0.95, help="quantile level (default 0.95)")
    b.add_argument(
        "--reference",
        type=_float,
        default=None,
        help="reference quantile (default: known value for gamma 0, 0.25, 0.45 at q=0.95)",
    )
    b.add_argument("--output-dir", default=None, help=f"output directory (default ${OUTPUT_DIR_ENV} or .)")
    _add_run(b)
    return parser


def _dump(obj):
    return json.dumps(obj, indent=None, separators=(", ", ": "))


def _output_dir(arg):
    path = Path(arg or os.environ.get(OUTPUT_DIR_ENV) or ".")
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {path}: {exc}") from exc
    return path


def cmd_quantile(args, out):
    params = WeightParams(args.eta, args.gamma)
    req = QuantileRequest(
        params, args.q, args.epsilon, args.seed, args.engine, args.ci_level, workers=args.workers
    )
    res = compute_quantile(req)
    record = {
        "eta": params.eta,
        "gamma": params.gamma,
        "q": args.q,
        "epsilon": args.epsilon,
        "engine": res.engine,
        "n0": res.n0,
        "k0": res.k0,
        "quantile": res.quantile,
        "ci_lo": res.ci[0] if res.ci else None,
        "ci_hi": res.ci[1] if res.ci else None,
        "seed": res.seed,
        "elapsed_sec": None if args.no_timing else res.elapsed,
    }
    print(_dump(record), file=out)


def _weight_for_source(eta, gamma, source):
    if source == "darling-erdos" and (eta, gamma) == (0.0, 0.5):
        return WeightParams.darling_erdos()
    return WeightParams(eta, gamma)


def cmd_critical_value(args, out):
    params = _weight_for_source(args.eta, args.gamma, args.source)
    c = critical_value(
        params, args.alpha, args.source, args.n, args.sigma, args.epsilon, args.seed, args.variant, args.workers
    )
    record = {
        "eta": params.eta,
        "gamma": params.gamma,
        "alpha": args.alpha,
        "source": args.source,
        "sigma": args.sigma,
        "n": args.n,
        "variant": args.variant if args.source == "darling-erdos" else None,
        "critical_value": c,
    }
    print(_dump(record), file=out)


def cmd_test(args, out):
    params = _weight_for_source(args.eta, args.gamma, args.source)
    # validate the configuration before touching the data
    check_source(params, args.source)
    try:
        x = read_series(args.input, args.column)
    except OSError as exc:
        raise DataError(f"cannot read {args.input}: {exc.strerror or exc}") from exc
    series = SeriesSample(x, args.sigma)
    outcome = run_test(
        series,
        params,
        args.alpha,
        args.source,
        args.critical_value,
        args.epsilon,
        args.seed,
        args.variant,
        keep_values=args.values,
        workers=args.workers,
    )
    record = {"eta": params.eta, "gamma": params.gamma}
    record.update(outcome.to_dict())
    print(_dump(record), file=out)


def _csv_name(kind, engine, params):
    return f"{kind}_{engine}_eta{params.eta:g}_gamma{params.gamma:g}.csv"


def _write_csv(path, records):
    try:
        with open(path, "w", newline="") as fh:
            emit_csv(records, fh)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _report_slopes(records, err):
    for against in ("sweep", "time"):
        usable = [r for r in records if r.error > 0 and (against == "sweep" or r.time_sec)]
        if len(usable) < 4:
            continue
        slope, stderr = estimate_order(usable, against)
        print(f"slope of log(error) vs log({against}): {slope:.3f} +/- {stderr:.3f}", file=err)


def cmd_bench(args, out, err):
    params = WeightParams(args.eta, args.gamma)
    outdir = _output_dir(args.output_dir)
    if args.bench == "strong":
        sweep = args.sweep or list(STRONG_SWEEPS[args.engine])
        records = bench_strong(
            params,
            args.engine,
            sweep,
            args.replications,
            args.reference_multiplier,
            args.seed,
            args.workers,
            timing=not args.no_timing,
        )
        path = outdir / _csv_name("strong", args.engine, params)
        if args.write_calibration:
            if args.engine != "equidistant":
                raise UsageError("--write-calibration requires --engine equidistant")
            curve = {(params.eta, params.gamma): ([r.sweep for r in records], [r.error for r in records])}
            try:
                write_table(args.write_calibration, curve, "mean strong error of the equidistant engine")
            except OSError as exc:
                raise OSError(f"cannot write {args.write_calibration}: {exc.strerror or exc}") from exc
    else:
        epsilons = args.epsilons or list(QUANTILE_SWEEP)
        if any(not e > 0 for e in epsilons):
            raise UsageError("tolerances must be positive")
        reference = args.reference
        if reference is None:
            if (params.eta, params.gamma) == (0.0, 0.0):
                reference = kolmogorov_quantile(args.q)
            elif args.q == 0.95 and (params.eta, params.gamma) in REFERENCE_QUANTILES:
                reference = REFERENCE_QUANTILES[(params.eta, params.gamma)]
            else:
                raise UsageError("no built-in reference for these parameters; pass --reference")

        def progress(rec):
            print(f"epsilon={rec.sweep:.4g} error={rec.error:.4g} time={rec.time_sec:.4g}s", file=err)

        records = bench_quantile(
            params, args.engine, epsilons, reference, args.replications, args.q, args.seed, args.workers, progress
        )
        path = outdir / _csv_name("quantile", args.engine, params)
    _write_csv(path, records)
    print(str(path), file=out)
    _report_slopes(records, err)


def main(argv=None, out=None, err=None):
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EX_USAGE
    if getattr(args, "workers", None) is None and hasattr(args, "workers"):
        args.workers = default_workers()
    try:
        if args.command == "quantile":
            cmd_quantile(args, out)
        elif args.command == "critical-value":
            cmd_critical_value(args, out)
        elif args.command == "test":
            cmd_test(args, out)
        else:
            cmd_bench(args, out, err)
    except PrecomputeDivergence as exc:
        print(f"bridgesup: precompute diverged: {exc}", file=err)
        return EX_DIVERGENCE
    except DataError as exc:
        print(f"bridgesup: data error: {exc}", file=err)
        return EX_DATAERR
    except (ParameterError, UsageError, ValueError) as exc:
        print(f"bridgesup: {exc}", file=err)
        return EX_USAGE
    except OSError as exc:
        print(f"bridgesup: {exc}", file=err)
        return EX_IOERR
    return 0


if __name__ == "__main__":
    sys.exit(main())
