import json
import math
import subprocess
import sys

import numpy as np
import pytest

from trapcosmo.cli import main
from trapcosmo.config import emit_config, parse_config
from trapcosmo.errors import ConfigError
from trapcosmo.sweep import SweepResult, emit, load_json, rows_finite, run_sweep

DE_SITTER = """\
chain.n_ions = 3
detector.detuning = 1.0
window.t_init = 0
window.t_final = 25
cosmology.kind = de_sitter
cosmology.kappa = 0.2
sweep.axis = detuning
sweep.min = 0.5
sweep.max = 2
sweep.count = 3
run.methods = numeric, analytic_finite, analytic_infinite
"""


def test_minimal_defaults():
    config = parse_config("")
    assert config.chain.n_ions == 2
    assert config.detector.window.shape == "rectangular"
    assert config.methods == ("numeric",)
    assert len(config.sweep.grid()) == 1


def test_comments_and_blank_lines():
    config = parse_config("# header\n\nchain.n_ions = 4   # four ions\n")
    assert config.chain.n_ions == 4


@pytest.mark.parametrize("text, kind, key, line", [
    ("chain.n_ions = 1", "invariant-violation", "chain.n_ions", 1),
    ("\nchain.ions = 3", "unknown-key", "chain.ions", 2),
    ("chain.n_ions = three", "type-mismatch", "chain.n_ions", 1),
    ("detector.detuning = 0", "invariant-violation", "detector.detuning", 1),
    ("chain.n_ions = 2\ndetector.ion_index = 3", "invariant-violation", "detector.ion_index", 2),
    ("sweep.count = 3\nsweep.min = 2\nsweep.max = 1", "invariant-violation", "sweep.max", 3),
    ("run.methods = analytic_infinite", "invariant-violation", "run.methods", 1),
    ("window.shape = hann", "type-mismatch", "window.shape", 1),
    ("chain.n_ions = 2\nchain.n_ions = 3", "invariant-violation", "chain.n_ions", 2),
    ("cosmology.kind = de_sitter", "invariant-violation", "cosmology.kappa", None),
])
def test_config_errors(text, kind, key, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    err = info.value
    assert err.kind == kind
    assert err.key == key
    assert err.line == line
    assert key in str(err)


def test_log_grid():
    config = parse_config("sweep.axis = detuning\nsweep.spacing = log\n"
                          "sweep.min = 0.1\nsweep.max = 10\nsweep.count = 50")
    grid = config.sweep.grid()
    assert len(grid) == 50
    assert grid[0] == pytest.approx(0.1) and grid[-1] == pytest.approx(10)
    assert np.allclose(grid[1:] / grid[:-1], grid[1] / grid[0])


def test_config_round_trip(tmp_path):
    table = tmp_path / "a.csv"
    table.write_text("t,a\n" + "".join(f"{t},{math.exp(0.1 * t)}\n" for t in range(-5, 6)))
    text = DE_SITTER + "physical.laser_wavenumber = 8.6e6\nwindow.shape = rectangular\n"
    first = parse_config(text)
    assert parse_config(emit_config(first)) == first
    tab = parse_config(f"cosmology.kind = tabulated\ncosmology.table = {table}\n"
                       "cosmology.anchor_t = 0\ncosmology.anchor_chi = -10\n"
                       "window.t_init = -4\nwindow.t_final = 4\n"
                       "window.shape = tukey\nwindow.ramp_fraction = 0.1")
    assert parse_config(emit_config(tab)) == tab


def test_sweep_rows_and_gap():
    result = run_sweep(parse_config(DE_SITTER))
    assert len(result.rows) == 3
    assert rows_finite(result)
    for row in result.rows:
        assert row["status"] == "ok"
        assert set(row["totals"]) == {"numeric", "analytic_finite", "analytic_infinite"}
        assert row["rel_gap"] < 1e-6
        assert row["t_gh"] == pytest.approx(0.2 / (2 * math.pi))


def test_sweep_planck_spectrum():
    config = parse_config("chain.n_ions = 3\ncosmology.kind = de_sitter\ncosmology.kappa = 0.5\n"
                          "sweep.min = 0.5\nsweep.max = 1.5\nsweep.count = 3\n"
                          "run.methods = analytic_infinite")
    result = run_sweep(config)
    scaled = [row["totals"]["analytic_infinite"] * row["axis"]
              * math.expm1(2 * math.pi * row["axis"] / 0.5) for row in result.rows]
    assert np.allclose(scaled, scaled[0], rtol=1e-13)
    assert list(result.rows[0]["totals"]) == ["analytic_infinite"]


def test_sweep_flat_red_below_blue():
    config = parse_config("chain.n_ions = 2\nwindow.t_final = 1000\n"
                          "sweep.min = -1\nsweep.max = 1\nsweep.count = 2")
    blue, red = (row["totals"]["numeric"] for row in run_sweep(config).rows)
    assert red < 1e-4 * blue


def test_single_point_and_failures_recorded():
    # more oscillations than the panel cap allows
    config = parse_config("chain.n_ions = 2\nwindow.t_final = 1e7\nrun.methods = numeric")
    result = run_sweep(config)
    assert len(result.rows) == 1
    assert result.rows[0]["status"].startswith("failed")
    assert result.rows[0]["totals"]["numeric"] is None


def test_parallel_matches_serial():
    config = parse_config(DE_SITTER)
    assert emit(run_sweep(config, jobs=3), "json") == emit(run_sweep(config), "json")


def test_emit_formats():
    empty = SweepResult("detuning", ("numeric",))
    assert emit(empty, "csv") == b"detuning,numeric,rel_gap,error,status\n"
    one = run_sweep(parse_config("chain.n_ions = 2\nwindow.t_final = 5"))
    text = emit(one, "csv").decode()
    assert text.count("\n") == 2 and "\r" not in text
    value = text.splitlines()[1].split(",")[1]
    assert float(value) == one.rows[0]["totals"]["numeric"]
    assert len(value.replace(".", "").replace("-", "").split("e")[0].lstrip("0")) <= 17
    with pytest.raises(ValueError):
        emit(one, "xml")


def test_json_round_trip_and_determinism():
    config = parse_config(DE_SITTER)
    first = emit(run_sweep(config), "json")
    assert first == emit(run_sweep(config), "json")
    assert emit(load_json(first), "json") == first
    assert emit(run_sweep(config), "csv") == emit(run_sweep(config), "csv")
    doc = json.loads(first)
    assert "timestamp" not in doc["metadata"]
    assert doc["methods"] == ["numeric", "analytic_infinite", "analytic_finite"]


def run_cli(*args):
    return main(list(args))


def test_cli_sweep_files_identical(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(DE_SITTER)
    for fmt in ("csv", "json"):
        out1, out2 = tmp_path / f"a.{fmt}", tmp_path / f"b.{fmt}"
        assert run_cli("sweep", "--config", str(cfg), "--output", str(out1), "--format", fmt) == 0
        assert run_cli("sweep", "--config", str(cfg), "--output", str(out2), "--format", fmt) == 0
        assert out1.read_bytes() == out2.read_bytes()


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("chain.n_ions = 1\n")
    assert run_cli("modes", "--config", str(bad)) == 2
    assert run_cli("modes", "--config", str(tmp_path / "missing.cfg")) == 4
    good = tmp_path / "good.cfg"
    good.write_text(DE_SITTER)
    assert run_cli("sweep", "--config", str(good), "--output",
                   str(tmp_path / "no" / "such" / "dir.csv")) == 4
    slow = tmp_path / "slow.cfg"
    slow.write_text("window.t_final = 1e7\n")
    assert run_cli("sweep", "--config", str(slow)) == 3
    assert run_cli("modes", "--tolerance", "-1") == 2
    capsys.readouterr()


def test_cli_modes_and_conformal(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(DE_SITTER)
    assert run_cli("modes", "--config", str(cfg)) == 0
    modes = json.loads(capsys.readouterr().out)
    assert np.allclose(modes["eigenvalues_mu"], [1, 3, 5.8])
    assert run_cli("conformal", "--config", str(cfg), "--points", "3") == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "t,chi,a" and len(lines) == 4
    assert float(lines[1].split(",")[1]) == pytest.approx(-5.0)


def test_cli_response_report(tmp_path, capsys):
    cfg = tmp_path / "r.cfg"
    cfg.write_text("cosmology.kind = de_sitter\ncosmology.kappa = 0.2\n"
                   f"window.t_final = {math.log(21) / 0.2!r}\n"
                   "run.methods = numeric, analytic_finite\n"
                   "physical.laser_wavenumber = 8.6e6\nphysical.atomic_frequency_hz = 4.1e14\n")
    assert run_cli("response", "--config", str(cfg)) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["modulation"]["modulation_span_hz"] == pytest.approx(20e6, rel=1e-12)
    assert report["modulation"]["window_growth"] == pytest.approx(21.0, rel=1e-12)
    assert 0.01 <= report["lamb_dicke"] <= 0.1
    assert report["laser_frequency_hz"][0] - report["laser_frequency_hz"][1] == pytest.approx(
        20e6, rel=1e-6)


def test_cli_selftest(capsys):
    assert run_cli("selftest") == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 54 and "FAIL" not in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "trapcosmo", "--version"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.startswith("trapcosmo ")
