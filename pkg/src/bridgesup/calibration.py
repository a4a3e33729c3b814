"""Strong-error curves of the equidistant engine, used to size ``n0``.

The shipped table ``data/eq_calibration.json`` is produced by
``bridgesup bench strong --engine equidistant --write-calibration PATH``.
Weights that are not in the table are calibrated on the fly with a
smaller run and cached for the life of the process.
"""

import json
import logging
import math
from functools import lru_cache
from importlib import resources

import numpy as np

log = logging.getLogger(__name__)

CALIBRATION_GRID = (2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000)
ON_THE_FLY_REPLICATIONS = 200


def default_table_path():
    return resources.files("bridgesup") / "data" / "eq_calibration.json"


def _key(eta, gamma):
    return (round(float(eta), 12), round(float(gamma), 12))


def load_table(path=None):
    """Map ``(eta, gamma)`` to ``(n values, errors)`` arrays."""
    source = default_table_path() if path is None else path
    with open(source) as fh:
        doc = json.load(fh)
    return {
        _key(e["eta"], e["gamma"]): (np.asarray(e["n"], dtype=float), np.asarray(e["error"], dtype=float))
        for e in doc["entries"]
    }


def write_table(path, curves, note=""):
    """Write ``{(eta, gamma): (ns, errors)}``, merging into an existing file."""
    try:
        table = load_table(path)
    except FileNotFoundError:
        table = {}
    table.update({_key(*k): v for k, v in curves.items()})
    entries = [
        {"eta": k[0], "gamma": k[1], "n": [int(x) for x in ns], "error": [float(x) for x in errs]}
        for k, (ns, errs) in sorted(table.items())
    ]
    with open(path, "w") as fh:
        json.dump({"note": note, "entries": entries}, fh, indent=1)
        fh.write("\n")


def n0_from_curve(ns, errors, epsilon):
    """Smallest grid size whose interpolated error is at most ``epsilon``.

    Interpolates log-linearly between table rows and extrapolates past
    the last row with order 1/2.
    """
    ns = np.asarray(ns, dtype=float)
    errors = np.minimum.accumulate(np.asarray(errors, dtype=float))
    hit = np.flatnonzero(errors <= epsilon)
    if hit.size == 0:
        n = ns[-1] * (errors[-1] / epsilon) ** 2
    elif hit[0] == 0:
        n = ns[0]
    else:
        i = hit[0]
        slope = math.log(ns[i] / ns[i - 1]) / math.log(errors[i] / errors[i - 1])
        n = ns[i - 1] * math.exp(slope * math.log(epsilon / errors[i - 1]))
        n = min(n, ns[i])
    return max(2, math.ceil(n - 1e-9))


@lru_cache(maxsize=None)
def _measured_curve(eta, gamma):
    from .bench import bench_strong
    from .weights import WeightParams

    log.info("calibrating equidistant engine on the fly for eta=%s, gamma=%s", eta, gamma)
    records = bench_strong(
        WeightParams(eta, gamma),
        "equidistant",
        CALIBRATION_GRID,
        replications=ON_THE_FLY_REPLICATIONS,
        timing=False,
    )
    return tuple(r.sweep for r in records), tuple(r.error for r in records)


def equidistant_n0(params, epsilon, table=None):
    curves = load_table() if table is None else table
    curve = curves.get(_key(params.eta, params.gamma))
    if curve is None:
        curve = _measured_curve(params.eta, params.gamma)
    return n0_from_curve(curve[0], curve[1], epsilon)
