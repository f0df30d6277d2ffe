"""Parameter sweeps over a configured experiment, and their CSV/JSON output."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from . import __version__
from .config import emit_config
from .cosmo import build_conformal_map
from .detector import (
    METHODS,
    gibbons_hawking_temperature,
    response_desitter_finite,
    response_desitter_infinite,
    response_numeric,
)
from .errors import TrapCosmoError
from .ionchain import normal_modes
from .numerics import QuadratureSettings


@dataclass
class SweepResult:
    axis: str
    methods: tuple
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)


def point_setup(config, value):
    """Detector spec, scale factor and conformal map for one grid value."""
    spec = config.detector
    model = config.cosmology
    axis = config.sweep.axis
    if axis == "detuning":
        spec = spec.with_detuning(float(value))
    elif axis == "kappa":
        model = replace(model, kappa=float(value))
    elif axis == "t_final":
        spec = replace(spec, window=replace(spec.window, t_final=float(value)))
    window = spec.window
    domain = (window.t_init, window.t_final) if model.kind == "power_law" else None
    return spec, model, build_conformal_map(model, domain)


def evaluate_point(config, modes, value):
    """One sweep row.  Failures are recorded in ``status``, never raised."""
    row = {"axis": float(value), "totals": {}, "per_mode": {},
           "rel_gap": None, "error": None, "t_gh": None, "status": "ok"}
    try:
        spec, model, cmap = point_setup(config, value)
        if model.kind == "de_sitter":
            row["t_gh"] = gibbons_hawking_temperature(model.kappa)
        results = {}
        for method in config.methods:
            if method == "numeric":
                settings = QuadratureSettings(rel_tol=config.tolerance)
                res = response_numeric(modes, spec, model, cmap, settings)
                row["error"] = res.quadrature_error
            elif method == "analytic_infinite":
                res = response_desitter_infinite(modes, spec, model.kappa)
            else:
                res = response_desitter_finite(modes, spec, model.kappa,
                                               spec.window.t_init, spec.window.t_final)
            results[method] = res
            row["totals"][method] = res.total
            row["per_mode"][method] = [float(x) for x in res.per_mode]
        if "numeric" in results and "analytic_finite" in results:
            exact = results["analytic_finite"].total
            row["rel_gap"] = abs(results["numeric"].total - exact) / abs(exact)
    except (TrapCosmoError, ValueError, ArithmeticError) as exc:
        row["totals"] = {m: None for m in config.methods}
        row["per_mode"] = {m: None for m in config.methods}
        row["rel_gap"] = None
        row["status"] = f"failed: {type(exc).__name__}: {exc}"
    return row


def run_sweep(config, jobs=1, timestamp=None):
    """Evaluate every grid point of ``config``.

    Points are independent and may run on ``jobs`` threads; rows always come
    back in grid order.  ``timestamp`` is copied into the metadata when given
    (left out by default so repeated runs are byte-identical).
    """
    modes = normal_modes(config.chain)
    grid = config.sweep.grid()

    def work(value):
        return evaluate_point(config, modes, value)

    if jobs > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(work, grid))
    else:
        rows = [work(value) for value in grid]
    metadata = {"config": emit_config(config), "version": __version__}
    if timestamp is not None:
        metadata["timestamp"] = timestamp
    return SweepResult(config.sweep.axis, tuple(config.methods), rows, metadata)


def _fmt(value):
    if value is None:
        return ""
    return format(value, ".17g")


def csv_header(result):
    return [result.axis, *result.methods, "rel_gap", "error", "status"]


def emit(result, fmt="csv"):
    """Serialise ``result`` to bytes.

    CSV: one header row (axis, one column per method, rel_gap, error,
    status), floats with 17 significant digits, LF line endings.  JSON: the
    full result with per-mode vectors and metadata, keys sorted.
    """
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(csv_header(result))
        for row in result.rows:
            writer.writerow([
                _fmt(row["axis"]),
                *(_fmt(row["totals"].get(m)) for m in result.methods),
                _fmt(row["rel_gap"]),
                _fmt(row["error"]),
                row["status"],
            ])
        return buf.getvalue().encode("utf-8")
    if fmt == "json":
        doc = {"axis": result.axis, "methods": list(result.methods),
               "rows": result.rows, "metadata": result.metadata}
        text = json.dumps(doc, sort_keys=True, indent=2, allow_nan=False)
        return (text + "\n").encode("utf-8")
    raise ValueError(f"unknown output format {fmt!r}")


def load_json(data):
    """Inverse of ``emit(result, 'json')``."""
    doc = json.loads(data)
    methods = tuple(doc["methods"])
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r} in result file")
    return SweepResult(doc["axis"], methods, doc["rows"], doc["metadata"])


def write_output(data, path):
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


def rows_finite(result):
    """True when every reported number in a successful row is finite."""
    for row in result.rows:
        if row["status"] != "ok":
            continue
        numbers = [row["axis"], *row["totals"].values()]
        numbers += [x for x in (row["rel_gap"], row["error"]) if x is not None]
        if not all(math.isfinite(x) for x in numbers):
            return False
    return True
