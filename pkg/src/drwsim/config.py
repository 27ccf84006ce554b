"""Strict YAML scenario configs with explicit units.

Lengths are written with a ``um``, ``mm`` or ``cm`` suffix and frequencies
with ``GHz``.  Internally lengths are kept in micrometres and frequencies in
GHz so that ``serialize`` followed by ``parse_config`` is exact.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Any

import yaml

from .errors import ConfigError, InvalidMaterial, MissingUnit, UnknownKey, UnsupportedSchemaVersion
from .model import DEFAULT_BAND, CrossSection, FrequencyGrid, Material, material_catalog

SUPPORTED_SCHEMA_VERSIONS = (1,)
SCENARIOS = ("modes", "straight", "loss-table", "bend-sweep", "crosstalk-sweep", "taper", "link")

# Sweep variable each scenario accepts; the first entry is the default.
SWEEP_VARIABLES = {
    "modes": (),
    "straight": ("tan_delta", "length"),
    "loss-table": ("tan_delta",),
    "bend-sweep": ("radius",),
    "crosstalk-sweep": ("gap",),
    "taper": ("taper_length", "segments"),
    "link": ("tan_delta",),
}
LENGTH_SWEEPS = {"length", "radius", "gap", "taper_length"}

DEFAULT_SWEEPS = {
    "loss-table": ("tan_delta", (0.0, 0.0005, 0.002)),
    "bend-sweep": ("radius", (25.0, 50.0, 100.0, 200.0, 400.0, 1000.0)),
    "crosstalk-sweep": ("gap", (10.0, 20.0, 40.0, 60.0, 80.0, 100.0)),
}

DEFAULT_TAN_DELTA = {"bend-sweep": 0.002}

_UM_PER = {"um": 1.0, "mm": 1e3, "cm": 1e4}
_QTY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z]*)\s*$")


def _location(lines: dict, path: str) -> str:
    line = lines.get(path)
    return f"{path} (line {line})" if line else path


def parse_length_um(value, path: str = "", lines: dict | None = None) -> float:
    """Length with a unit suffix, returned in micrometres."""
    lines = lines or {}
    m = _QTY.match(str(value)) if isinstance(value, str) else None
    if m is None or not m.group(2):
        raise MissingUnit(f"length {value!r} needs a unit suffix (um, mm, cm)", path, _location(lines, path))
    unit = m.group(2)
    if unit not in _UM_PER:
        raise MissingUnit(f"unsupported length unit {unit!r} (use um, mm, cm)", path, _location(lines, path))
    return float(m.group(1)) * _UM_PER[unit] if unit != "um" else float(m.group(1))


def parse_freq_ghz(value, path: str = "", lines: dict | None = None) -> float:
    lines = lines or {}
    m = _QTY.match(str(value)) if isinstance(value, str) else None
    if m is None or m.group(2) != "GHz":
        raise MissingUnit(f"frequency {value!r} needs the GHz suffix", path, _location(lines, path))
    return float(m.group(1))


@dataclass(frozen=True)
class MaterialRef:
    """A catalog name or an inline material."""

    material: Material
    catalog_name: str | None = None

    def to_yaml(self):
        if self.catalog_name is not None:
            return self.catalog_name
        return {"eps_r": self.material.eps_r, "tan_delta": self.material.tan_delta}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    a_um: float = 160.0
    b_um: float = 80.0
    core: MaterialRef = field(default_factory=lambda: MaterialRef(material_catalog()["paper-core-lossless"], "paper-core-lossless"))
    clad: MaterialRef = field(default_factory=lambda: MaterialRef(material_catalog()["paper-clad"], "paper-clad"))
    band_start_ghz: float = DEFAULT_BAND[0] / 1e9
    band_stop_ghz: float = DEFAULT_BAND[1] / 1e9
    band_points: int = 9
    sweep_variable: str | None = None
    sweep_values: tuple = ()
    cells_per_wavelength: int = 20
    n_modes: int | None = None
    theta: float = 0.02
    workers: int = 1
    length_um: float = 30000.0
    tan_delta: float | None = None
    bend_plane: str = "in-plane-of-a"
    radius_reference: str = "inner"
    bend_radii_um: tuple = ()
    taper_length_um: float = 2000.0
    taper_segments: int = 64
    launch_area_ratio: float = 3.0
    launch_a_um: float | None = None
    launch_b_um: float | None = None
    coupled_length_um: float = 1000.0
    output_directory: str | None = None
    schema_version: int = 1

    @property
    def cross_section(self) -> CrossSection:
        return CrossSection(self.a_um / 1e6, self.b_um / 1e6, self.core.material, self.clad.material)

    @property
    def band(self) -> FrequencyGrid:
        return FrequencyGrid.linspace(self.band_start_ghz * 1e9, self.band_stop_ghz * 1e9, self.band_points)

    @property
    def sweep_si(self) -> tuple:
        """Sweep values in SI units (lengths in metres)."""
        scale = 1e6 if self.sweep_variable in LENGTH_SWEEPS else 1.0
        return tuple(v / scale for v in self.sweep_values)

    @property
    def effective_tan_delta(self) -> float:
        """Configured loss tangent, or the scenario default (0.002 for bend sweeps, else 0)."""
        if self.tan_delta is not None:
            return self.tan_delta
        return DEFAULT_TAN_DELTA.get(self.scenario, 0.0)

    def digest(self) -> str:
        return hashlib.sha256(serialize(self).encode()).hexdigest()


# section -> key -> (attribute, kind)
_SCHEMA: dict[str, dict[str, tuple[str, str]]] = {
    "geometry": {"a": ("a_um", "length"), "b": ("b_um", "length")},
    "materials": {"core": ("core", "material"), "clad": ("clad", "material")},
    "band": {"start": ("band_start_ghz", "freq"), "stop": ("band_stop_ghz", "freq"), "points": ("band_points", "int")},
    "solver": {
        "cells_per_wavelength": ("cells_per_wavelength", "int"),
        "n_modes": ("n_modes", "int"),
        "theta": ("theta", "float"),
        "workers": ("workers", "int"),
    },
    "channel": {"length": ("length_um", "length"), "tan_delta": ("tan_delta", "float")},
    "bend": {
        "plane": ("bend_plane", "str"),
        "radius_reference": ("radius_reference", "str"),
        "radii": ("bend_radii_um", "length_list"),
    },
    "taper": {
        "length": ("taper_length_um", "length"),
        "segments": ("taper_segments", "int"),
        "launch_area_ratio": ("launch_area_ratio", "float"),
        "launch_a": ("launch_a_um", "length"),
        "launch_b": ("launch_b_um", "length"),
    },
    "crosstalk": {"length": ("coupled_length_um", "length")},
    "output": {"directory": ("output_directory", "str")},
}
_TOP = {"schema_version", "scenario", "sweep", *_SCHEMA}
_SWEEP_KEYS = {"variable", "values"}


def _line_map(text: str) -> dict:
    """Dotted key path -> 1-based line number, from the YAML node tree."""
    out: dict[str, int] = {}

    def walk(node, prefix):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                path = f"{prefix}.{k.value}" if prefix else str(k.value)
                out[path] = k.start_mark.line + 1
                walk(v, path)

    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return out
    walk(root, "")
    return out


def _material(value, path, lines) -> MaterialRef:
    if isinstance(value, str):
        try:
            return MaterialRef(material_catalog()[value], value)
        except KeyError:
            raise ConfigError(f"unknown material {value!r}", path, _location(lines, path)) from None
    if isinstance(value, dict):
        extra = set(value) - {"eps_r", "tan_delta"}
        if extra:
            key = sorted(extra)[0]
            raise UnknownKey(f"unknown key {key!r}", f"{path}.{key}", _location(lines, f"{path}.{key}"))
        if "eps_r" not in value:
            raise ConfigError("inline material needs eps_r", path, _location(lines, path))
        try:
            m = Material(path, float(value["eps_r"]), float(value.get("tan_delta", 0.0)))
        except (InvalidMaterial, TypeError, ValueError) as exc:
            raise ConfigError(str(exc), path, _location(lines, path)) from None
        return MaterialRef(m, None)
    raise ConfigError(f"material must be a catalog name or a mapping, got {value!r}", path, _location(lines, path))


def _convert(kind, value, path, lines):
    if kind == "length":
        return parse_length_um(value, path, lines)
    if kind == "freq":
        return parse_freq_ghz(value, path, lines)
    if kind == "material":
        return _material(value, path, lines)
    if kind == "length_list":
        if not isinstance(value, list):
            raise ConfigError("expected a list", path, _location(lines, path))
        return tuple(parse_length_um(v, f"{path}[{i}]", lines) for i, v in enumerate(value))
    try:
        if kind == "int":
            if isinstance(value, bool) or int(value) != value:
                raise ValueError
            return int(value)
        if kind == "float":
            return float(value)
        if kind == "str":
            return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"invalid {kind} value {value!r}", path, _location(lines, path)) from None
    raise AssertionError(kind)


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a scenario document; unknown keys and unit-less quantities are errors."""
    if not text or not text.strip():
        raise ConfigError("empty config")
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")
    lines = _line_map(text)
    for key in doc:
        if key not in _TOP:
            raise UnknownKey(f"unknown key {key!r}", key, _location(lines, str(key)))
    version = doc.get("schema_version")
    if version not in SUPPORTED_SCHEMA_VERSIONS:
        raise UnsupportedSchemaVersion(
            f"schema_version {version!r} not supported (supported: {SUPPORTED_SCHEMA_VERSIONS})",
            "schema_version", _location(lines, "schema_version"),
        )
    scenario = doc.get("scenario")
    if scenario not in SCENARIOS:
        raise ConfigError(f"scenario must be one of {SCENARIOS}, got {scenario!r}", "scenario", _location(lines, "scenario"))
    kw: dict[str, Any] = {"scenario": scenario, "schema_version": version}
    for section, keys in _SCHEMA.items():
        body = doc.get(section)
        if body is None:
            continue
        if not isinstance(body, dict):
            raise ConfigError(f"section {section!r} must be a mapping", section, _location(lines, section))
        for key, value in body.items():
            path = f"{section}.{key}"
            if key not in keys:
                raise UnknownKey(f"unknown key {key!r}", path, _location(lines, path))
            attr, kind = keys[key]
            kw[attr] = _convert(kind, value, path, lines)
    if "sweep" in doc:
        kw.update(_parse_sweep(doc["sweep"], scenario, lines))
    elif scenario in DEFAULT_SWEEPS:
        var, vals = DEFAULT_SWEEPS[scenario]
        kw.update(sweep_variable=var, sweep_values=vals)
    cfg = ScenarioConfig(**kw)
    _validate(cfg, lines)
    return cfg


def _parse_sweep(body, scenario, lines) -> dict:
    if not isinstance(body, dict):
        raise ConfigError("sweep must be a mapping", "sweep", _location(lines, "sweep"))
    for key in body:
        if key not in _SWEEP_KEYS:
            raise UnknownKey(f"unknown key {key!r}", f"sweep.{key}", _location(lines, f"sweep.{key}"))
    var = body.get("variable")
    allowed = SWEEP_VARIABLES[scenario]
    if var not in allowed:
        raise ConfigError(
            f"scenario {scenario!r} sweeps one of {allowed or 'nothing'}, got {var!r}",
            "sweep.variable", _location(lines, "sweep.variable"),
        )
    values = body.get("values")
    if not isinstance(values, list) or not values:
        raise ConfigError("sweep.values must be a non-empty list", "sweep.values", _location(lines, "sweep.values"))
    if var in LENGTH_SWEEPS:
        vals = tuple(parse_length_um(v, f"sweep.values[{i}]", lines) for i, v in enumerate(values))
    elif var == "segments":
        vals = tuple(_convert("int", v, f"sweep.values[{i}]", lines) for i, v in enumerate(values))
    else:
        vals = tuple(_convert("float", v, f"sweep.values[{i}]", lines) for i, v in enumerate(values))
    return {"sweep_variable": var, "sweep_values": vals}


def _validate(cfg: ScenarioConfig, lines):
    def bad(msg, key):
        raise ConfigError(msg, key, _location(lines, key))

    if cfg.band_points < 1:
        bad("band.points must be >= 1", "band.points")
    if cfg.band_points > 1 and not cfg.band_stop_ghz > cfg.band_start_ghz:
        bad("band.stop must exceed band.start", "band.stop")
    if cfg.cells_per_wavelength < 20:
        bad("solver.cells_per_wavelength must be >= 20", "solver.cells_per_wavelength")
    if cfg.n_modes is not None and cfg.n_modes < 1:
        bad("solver.n_modes must be >= 1", "solver.n_modes")
    if cfg.workers < 1:
        bad("solver.workers must be >= 1", "solver.workers")
    if cfg.bend_plane not in ("in-plane-of-a", "in-plane-of-b"):
        bad("bend.plane must be in-plane-of-a or in-plane-of-b", "bend.plane")
    if cfg.radius_reference not in ("inner", "centerline"):
        bad("bend.radius_reference must be inner or centerline", "bend.radius_reference")
    try:
        cfg.cross_section
    except ValueError as exc:
        bad(str(exc), "geometry")


def _fmt_len(um: float) -> str:
    return f"{um!r}um"


def _fmt_ghz(v: float) -> str:
    return f"{v!r}GHz"


def to_document(cfg: ScenarioConfig) -> dict:
    """Nested mapping that ``parse_config`` accepts and maps back to ``cfg``."""
    doc: dict[str, Any] = {"schema_version": cfg.schema_version, "scenario": cfg.scenario}
    for section, keys in _SCHEMA.items():
        body = {}
        for key, (attr, kind) in keys.items():
            v = getattr(cfg, attr)
            if v is None:
                continue
            if kind == "length":
                v = _fmt_len(v)
            elif kind == "freq":
                v = _fmt_ghz(v)
            elif kind == "material":
                v = v.to_yaml()
            elif kind == "length_list":
                v = [_fmt_len(x) for x in v]
            body[key] = v
        if body:
            doc[section] = body
    if cfg.sweep_variable is not None:
        vals = [_fmt_len(v) if cfg.sweep_variable in LENGTH_SWEEPS else v for v in cfg.sweep_values]
        doc["sweep"] = {"variable": cfg.sweep_variable, "values": vals}
    return doc


def serialize(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(to_document(cfg), sort_keys=False, default_flow_style=None)


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
