"""Experiment configuration: a flat ``section.key = value`` text format.

Example::

    # de Sitter red sideband, sweep the detuning
    chain.n_ions = 3
    detector.ion_index = 1
    detector.detuning = 1.0
    window.t_init = 0
    window.t_final = 150
    cosmology.kind = de_sitter
    cosmology.kappa = 0.2
    sweep.axis = detuning
    sweep.min = 0.5
    sweep.max = 2
    sweep.count = 4
    run.methods = numeric, analytic_finite
    output.format = csv

Frequencies are in units of the trap frequency nu and times in 1/nu.  The
``physical`` section carries SI quantities used only for the Lamb-Dicke
parameter and the laser-frequency report.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import constants

from .cosmo import KINDS, SHAPES, ScaleFactorModel, WindowSpec
from .detector import METHODS, DetectorSpec
from .errors import ConfigError
from .ionchain import IonChainConfig

AXES = ("detuning", "kappa", "t_final")
SPACINGS = ("linear", "log")
FORMATS = ("csv", "json")


def _enum(choices):
    def parse(text):
        if text not in choices:
            raise ValueError(f"expected one of {', '.join(choices)}")
        return text
    parse.__name__ = "one of " + "/".join(choices)
    return parse


def _methods(text):
    items = tuple(item.strip() for item in text.split(",") if item.strip())
    for item in items:
        if item not in METHODS:
            raise ValueError(f"unknown method {item!r}")
    if not items:
        raise ValueError("empty method list")
    return tuple(m for m in METHODS if m in items)


def _int(text):
    return int(text)


def _str(text):
    return text


_int.__name__ = "integer"
_methods.__name__ = "comma-separated methods"
_str.__name__ = "string"

# key -> (parser, default)
SCHEMA = {
    "chain.n_ions": (_int, 2),
    "detector.ion_index": (_int, 1),
    "detector.detuning": (float, 1.0),
    "detector.coupling": (float, 1.0),
    "detector.n_dim": (_int, 2),
    "window.t_init": (float, 0.0),
    "window.t_final": (float, 10.0),
    "window.shape": (_enum(SHAPES), "rectangular"),
    "window.ramp_fraction": (float, None),
    "cosmology.kind": (_enum(KINDS), "flat"),
    "cosmology.kappa": (float, 0.0),
    "cosmology.exponent": (float, 0.0),
    "cosmology.t0": (float, 1.0),
    "cosmology.table": (_str, None),
    "cosmology.anchor_t": (float, None),
    "cosmology.anchor_chi": (float, None),
    "sweep.axis": (_enum(AXES), "detuning"),
    "sweep.min": (float, None),
    "sweep.max": (float, None),
    "sweep.count": (_int, 1),
    "sweep.spacing": (_enum(SPACINGS), "linear"),
    "run.methods": (_methods, ("numeric",)),
    "run.tolerance": (float, 1e-9),
    "output.path": (_str, None),
    "output.format": (_enum(FORMATS), "csv"),
    "physical.trap_frequency_hz": (float, 1e6),
    "physical.ion_mass_kg": (float, 40 * constants.atomic_mass),
    "physical.laser_wavenumber": (float, None),
    "physical.laser_angle": (float, 0.0),
    "physical.atomic_frequency_hz": (float, None),
}


@dataclass(frozen=True)
class SweepSpec:
    axis: str = "detuning"
    min: float = 1.0
    max: float = 1.0
    count: int = 1
    spacing: str = "linear"

    def grid(self):
        if self.count == 1:
            return np.array([self.min])
        if self.spacing == "log":
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)


@dataclass(frozen=True)
class ExperimentConfig:
    chain: IonChainConfig
    detector: DetectorSpec
    cosmology: ScaleFactorModel
    sweep: SweepSpec
    methods: tuple = ("numeric",)
    tolerance: float = 1e-9
    output_path: str | None = None
    output_format: str = "csv"
    table_path: str | None = None
    laser_wavenumber: float | None = None
    laser_angle: float = 0.0
    atomic_frequency_hz: float | None = None
    values: dict = field(default_factory=dict, compare=False, repr=False)


# constructor error fragments -> the config key responsible
_MESSAGE_KEYS = (
    ("n_ions", "chain.n_ions"),
    ("trap_frequency", "physical.trap_frequency_hz"),
    ("ion_mass", "physical.ion_mass_kg"),
    ("ion_index", "detector.ion_index"),
    ("detuning", "detector.detuning"),
    ("coupling", "detector.coupling"),
    ("n_dim", "detector.n_dim"),
    ("ramp", "window.ramp_fraction"),
    ("t_final > t_init", "window.t_final"),
    ("kappa", "cosmology.kappa"),
    ("t0", "cosmology.t0"),
    ("tabulated", "cosmology.table"),
    ("scale factor in table", "cosmology.table"),
)


def _read_table(path):
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh)
                if row and not row[0].lstrip().startswith("#")]
    data = []
    for row in rows:
        try:
            data.append((float(row[0]), float(row[1])))
        except (ValueError, IndexError):
            continue  # header line
    return data


def parse_config(text, base_dir=None):
    """Parse and validate configuration text.

    Raises
    ------
    ConfigError
        On the first problem found, naming the key and, for syntax, type and
        unknown-key problems, the line.
    """
    raw = {}
    lines = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'key = value', got {stripped!r}",
                              kind="type-mismatch", line=lineno)
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}", kind="unknown-key", key=key, line=lineno)
        if key in raw:
            raise ConfigError(f"duplicate key {key!r}", kind="invariant-violation",
                              key=key, line=lineno)
        parser = SCHEMA[key][0]
        try:
            raw[key] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"{key}: cannot read {value!r} as {parser.__name__} ({exc})",
                              kind="type-mismatch", key=key, line=lineno) from None
        lines[key] = lineno

    values = {key: raw.get(key, default) for key, (_, default) in SCHEMA.items()}

    def fail(key, message):
        raise ConfigError(f"{key}: {message}", kind="invariant-violation",
                          key=key, line=lines.get(key))

    def build(key, factory, *args, **kwargs):
        try:
            return factory(*args, **kwargs)
        except ValueError as exc:
            message = str(exc)
            for fragment, owner in _MESSAGE_KEYS:
                if fragment in message:
                    key = owner
                    break
            fail(key, message)

    chain = build("chain.n_ions", IonChainConfig, values["chain.n_ions"],
                  values["physical.trap_frequency_hz"], values["physical.ion_mass_kg"])
    window = build("window.t_final", WindowSpec, values["window.t_init"],
                   values["window.t_final"], values["window.shape"],
                   values["window.ramp_fraction"])
    detector = build("detector.detuning", DetectorSpec, values["detector.ion_index"],
                     values["detector.detuning"], values["detector.coupling"],
                     values["detector.n_dim"], window)
    if detector.ion_index > chain.n_ions:
        fail("detector.ion_index", f"ion {detector.ion_index} > n_ions = {chain.n_ions}")

    kind = values["cosmology.kind"]
    table_path = values["cosmology.table"]
    anchor = None
    if values["cosmology.anchor_t"] is not None or values["cosmology.anchor_chi"] is not None:
        if values["cosmology.anchor_t"] is None or values["cosmology.anchor_chi"] is None:
            fail("cosmology.anchor_t", "anchor_t and anchor_chi must be given together")
        anchor = (values["cosmology.anchor_t"], values["cosmology.anchor_chi"])
    table = None
    if kind == "tabulated":
        if table_path is None:
            fail("cosmology.table", "tabulated cosmology needs a table file")
        path = Path(table_path)
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        try:
            table = tuple(_read_table(path))
        except OSError as exc:
            fail("cosmology.table", f"cannot read {path}: {exc.strerror}")
    model = build("cosmology.kind", ScaleFactorModel, kind, values["cosmology.kappa"],
                  values["cosmology.exponent"], values["cosmology.t0"], table, anchor)

    axis = values["sweep.axis"]
    count = values["sweep.count"]
    if count < 1:
        fail("sweep.count", "grid count must be >= 1")
    axis_default = {"detuning": detector.detuning, "kappa": model.kappa,
                    "t_final": window.t_final}[axis]
    lo = values["sweep.min"] if values["sweep.min"] is not None else axis_default
    hi = values["sweep.max"] if values["sweep.max"] is not None else lo
    if count > 1 and not lo < hi:
        fail("sweep.max", "need sweep.min < sweep.max when sweep.count > 1")
    if values["sweep.spacing"] == "log" and lo <= 0:
        fail("sweep.spacing", "log spacing needs a positive range")
    sweep = SweepSpec(axis, lo, hi, count, values["sweep.spacing"])
    grid = sweep.grid()
    if axis == "detuning" and np.any(grid == 0):
        fail("sweep.min", "detuning grid contains zero")
    if axis == "kappa":
        if kind != "de_sitter":
            fail("sweep.axis", "a kappa sweep needs cosmology.kind = de_sitter")
        if np.any(grid <= 0):
            fail("sweep.min", "kappa grid must be positive")
    if axis == "t_final" and np.any(grid <= window.t_init):
        fail("sweep.min", "t_final grid must exceed window.t_init")

    methods = values["run.methods"]
    analytic = [m for m in methods if m.startswith("analytic")]
    if analytic:
        if kind != "de_sitter":
            fail("run.methods", f"{analytic[0]} needs cosmology.kind = de_sitter")
        if detector.n_dim != 2:
            fail("run.methods", f"{analytic[0]} needs detector.n_dim = 2")
    if "analytic_finite" in methods and window.shape != "rectangular":
        fail("run.methods", "analytic_finite needs a rectangular window")
    if not values["run.tolerance"] > 0:
        fail("run.tolerance", "tolerance must be positive")

    return ExperimentConfig(
        chain=chain, detector=detector, cosmology=model, sweep=sweep,
        methods=methods, tolerance=values["run.tolerance"],
        output_path=values["output.path"], output_format=values["output.format"],
        table_path=table_path, laser_wavenumber=values["physical.laser_wavenumber"],
        laser_angle=values["physical.laser_angle"],
        atomic_frequency_hz=values["physical.atomic_frequency_hz"],
        values=values)


def _format_value(value):
    if isinstance(value, tuple):
        return ", ".join(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_config(config):
    """Write ``config`` back out in the text format, one key per line.

    Only keys that carry a value are written, in schema order.
    """
    c = config
    values = {
        "chain.n_ions": c.chain.n_ions,
        "detector.ion_index": c.detector.ion_index,
        "detector.detuning": float(c.detector.detuning),
        "detector.coupling": float(c.detector.coupling),
        "detector.n_dim": c.detector.n_dim,
        "window.t_init": float(c.detector.window.t_init),
        "window.t_final": float(c.detector.window.t_final),
        "window.shape": c.detector.window.shape,
        "window.ramp_fraction": float(c.detector.window.ramp_fraction),
        "cosmology.kind": c.cosmology.kind,
        "cosmology.kappa": float(c.cosmology.kappa),
        "cosmology.exponent": float(c.cosmology.exponent),
        "cosmology.t0": float(c.cosmology.t0),
        "cosmology.table": c.table_path,
        "cosmology.anchor_t": c.cosmology.anchor[0] if c.cosmology.anchor else None,
        "cosmology.anchor_chi": c.cosmology.anchor[1] if c.cosmology.anchor else None,
        "sweep.axis": c.sweep.axis,
        "sweep.min": float(c.sweep.min),
        "sweep.max": float(c.sweep.max),
        "sweep.count": c.sweep.count,
        "sweep.spacing": c.sweep.spacing,
        "run.methods": c.methods,
        "run.tolerance": float(c.tolerance),
        "output.path": c.output_path,
        "output.format": c.output_format,
        "physical.trap_frequency_hz": float(c.chain.trap_frequency),
        "physical.ion_mass_kg": float(c.chain.ion_mass),
        "physical.laser_wavenumber": c.laser_wavenumber,
        "physical.laser_angle": float(c.laser_angle),
        "physical.atomic_frequency_hz": c.atomic_frequency_hz,
    }
    if c.detector.window.shape == "rectangular":
        values["window.ramp_fraction"] = None
    lines = [f"{key} = {_format_value(value)}"
             for key, value in values.items() if value is not None]
    return "\n".join(lines) + "\n"

