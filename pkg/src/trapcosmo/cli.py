"""Command-line entry point.

Subcommands: ``modes``, ``conformal``, ``response``, ``sweep``, ``selftest``.
Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import parse_config
from .cosmo import laser_frequency_schedule, modulation_summary
from .detector import gibbons_hawking_temperature, oracle_equivalence
from .errors import ConfigError, TrapCosmoError
from .ionchain import lamb_dicke, normal_modes
from .numerics import QuadratureSettings
from .sweep import emit, evaluate_point, point_setup, run_sweep, write_output

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

SELFTEST_TOL = 1e-5


def load_config(path, tolerance=None):
    if path is None:
        config = parse_config("")
    else:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise OSError(exc.errno, f"cannot read config {path}: {exc.strerror}") from exc
        config = parse_config(text, base_dir=Path(path).parent)
    if tolerance is not None:
        if not tolerance > 0:
            raise ConfigError("--tolerance must be positive", key="run.tolerance")
        config = replace(config, tolerance=tolerance)
    return config


def _dump(obj, args, default_format="json"):
    fmt = args.format or default_format
    if fmt == "json":
        data = (json.dumps(obj, sort_keys=True, indent=2) + "\n").encode()
    else:
        rows = obj if isinstance(obj, list) else [obj]
        header = list(rows[0]) if rows else []
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(format(row[k], ".17g") if isinstance(row[k], float)
                                  else str(row[k]) for k in header))
        data = ("\n".join(lines) + "\n").encode()
    if args.output:
        write_output(data, args.output)
    else:
        sys.stdout.buffer.write(data)


def cmd_modes(args, config):
    modes = normal_modes(config.chain)
    _dump({
        "n_ions": modes.n_ions,
        "equilibrium_positions": modes.equilibrium_positions.tolist(),
        "eigenvalues_mu": modes.eigenvalues_mu.tolist(),
        "frequencies": modes.frequencies.tolist(),
        "mode_matrix_b": modes.mode_matrix_b.tolist(),
    }, args)
    return EXIT_OK


def cmd_conformal(args, config):
    spec, model, cmap = point_setup(config, config.sweep.grid()[0])
    window = spec.window
    t = np.linspace(window.t_init, window.t_final, args.points)
    rows = [{"t": float(ti), "chi": float(ci), "a": float(ai)}
            for ti, ci, ai in zip(t, cmap.forward(t), model.scale_factor(t))]
    _dump(rows, args, default_format="csv")
    return EXIT_OK


def cmd_response(args, config):
    modes = normal_modes(config.chain)
    value = config.sweep.grid()[0]
    row = evaluate_point(config, modes, value)
    spec, model, cmap = point_setup(config, value)
    report = {"axis": config.sweep.axis, "value": float(value), "status": row["status"],
              "totals": row["totals"], "per_mode": row["per_mode"],
              "rel_gap": row["rel_gap"], "quadrature_error": row["error"]}
    if model.kind == "de_sitter":
        report["gibbons_hawking_temperature"] = gibbons_hawking_temperature(model.kappa)
    summary = modulation_summary(spec.window, model, cmap, spec.detuning, spec.n_dim)
    summary["modulation_span_hz"] = summary["modulation_span"] * config.chain.trap_frequency
    report["modulation"] = summary
    if config.atomic_frequency_hz is not None:
        omega_l = laser_frequency_schedule(model, cmap, spec.detuning * config.chain.trap_frequency,
                                           config.atomic_frequency_hz)
        chi = cmap.forward(np.array([spec.window.t_init, spec.window.t_final]))
        report["laser_frequency_hz"] = [float(x) for x in omega_l(chi)]
    if config.laser_wavenumber is not None:
        report["lamb_dicke"] = lamb_dicke(config.laser_wavenumber, config.laser_angle,
                                          config.chain)
    if spec.n_dim > 2 and "numeric" in config.methods:
        report["notes"] = ["detector-picture extension (n > 2)"]
    _dump(report, args)
    return EXIT_OK if row["status"] == "ok" else EXIT_NUMERIC


def cmd_sweep(args, config):
    stamp = None
    if args.timestamp:
        epoch = os.environ.get("SOURCE_DATE_EPOCH")
        when = (datetime.fromtimestamp(int(epoch), timezone.utc) if epoch
                else datetime.now(timezone.utc))
        stamp = when.isoformat()
    result = run_sweep(config, jobs=args.jobs, timestamp=stamp)
    fmt = args.format or config.output_format
    data = emit(result, fmt)
    path = args.output or config.output_path
    if path:
        write_output(data, path)
    else:
        sys.stdout.buffer.write(data)
    failed = [row for row in result.rows if row["status"] != "ok"]
    for row in failed:
        print(f"point {row['axis']!r}: {row['status']}", file=sys.stderr)
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_selftest(args, config):
    modes = normal_modes(config.chain if config.chain.n_ions > 2 else replace(config.chain, n_ions=3))
    settings = QuadratureSettings(rel_tol=config.tolerance)
    worst = 0.0
    failures = 0
    for kappa, delta, kappa_t, num, exact, gap in oracle_equivalence(modes, settings=settings):
        ok = gap <= SELFTEST_TOL
        failures += not ok
        worst = max(worst, gap)
        print(f"{'PASS' if ok else 'FAIL'} kappa={kappa:g} delta={delta:+g} kappaT={kappa_t:g} "
              f"numeric={num:.12e} analytic={exact:.12e} gap={gap:.2e}")
    print(f"worst relative gap {worst:.3e} (tolerance {SELFTEST_TOL:g}); {failures} failures")
    return EXIT_OK if failures == 0 else EXIT_NUMERIC


def build_parser():
    parser = argparse.ArgumentParser(
        prog="trapcosmo",
        description="Trapped-ion detector-picture simulator for FLRW cosmologies.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="experiment configuration file")
    common.add_argument("--output", metavar="PATH", help="write results here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--tolerance", type=float, metavar="REAL",
                        help="relative quadrature tolerance (overrides run.tolerance)")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("modes", parents=[common], help="print the normal modes of the chain")
    p = sub.add_parser("conformal", parents=[common], help="tabulate chi(t) over the window")
    p.add_argument("--points", type=int, default=101)
    sub.add_parser("response", parents=[common], help="single-point response and laser report")
    p = sub.add_parser("sweep", parents=[common], help="run the configured grid")
    p.add_argument("--jobs", type=int, default=1, help="evaluate points on this many threads")
    p.add_argument("--timestamp", action="store_true",
                   help="record a timestamp (SOURCE_DATE_EPOCH if set) in the metadata")
    sub.add_parser("selftest", parents=[common],
                   help="compare quadrature with the de Sitter closed form on a grid")
    return parser


COMMANDS = {
    "modes": cmd_modes,
    "conformal": cmd_conformal,
    "response": cmd_response,
    "sweep": cmd_sweep,
    "selftest": cmd_selftest,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, args.tolerance)
        return COMMANDS[args.command](args, config)
    except ConfigError as exc:
        print(f"config error ({exc.kind}): {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (TrapCosmoError, ArithmeticError, ValueError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
