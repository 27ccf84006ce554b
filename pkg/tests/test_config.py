import pytest

from drwsim.config import (
    ScenarioConfig,
    load_config,
    parse_config,
    parse_freq_ghz,
    parse_length_um,
    serialize,
)
from drwsim.errors import ConfigError, MissingUnit, UnknownKey, UnsupportedSchemaVersion

MINIMAL = "schema_version: 1\nscenario: straight\n"


def test_minimal_config_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg == ScenarioConfig(scenario="straight")
    cs = cfg.cross_section
    assert (cs.a, cs.b) == (160e-6, 80e-6)
    assert cs.core.eps_r == 1000.0 and cs.clad.eps_r == 12.0
    assert cfg.band.array[0] == 80e9 and cfg.band.array[-1] == 160e9
    assert cfg.effective_tan_delta == 0.0


def test_scenario_defaults():
    assert parse_config("schema_version: 1\nscenario: bend-sweep\n").effective_tan_delta == 0.002
    loss = parse_config("schema_version: 1\nscenario: loss-table\n")
    assert loss.sweep_variable == "tan_delta" and loss.sweep_values == (0.0, 0.0005, 0.002)


def test_unknown_key_reports_path_and_line():
    text = "schema_version: 1\nscenario: straight\ngeometry:\n  a: 160um\n  lenght: 3cm\n"
    with pytest.raises(UnknownKey) as err:
        parse_config(text)
    assert err.value.key == "geometry.lenght"
    assert "line 5" in str(err.value)


def test_unknown_top_level_key():
    with pytest.raises(UnknownKey):
        parse_config(MINIMAL + "extras: 1\n")


@pytest.mark.parametrize("value", ["160", "160 furlongs", 160])
def test_length_needs_unit(value):
    with pytest.raises(MissingUnit):
        parse_length_um(value, "geometry.a")


def test_units_convert():
    assert parse_length_um("3cm") == 30000.0
    assert parse_length_um("2 mm") == 2000.0
    assert parse_length_um("1.5e2um") == 150.0
    assert parse_freq_ghz("110GHz") == 110.0
    with pytest.raises(MissingUnit):
        parse_freq_ghz("110e9")


def test_missing_unit_in_document_has_location():
    with pytest.raises(MissingUnit) as err:
        parse_config(MINIMAL + "channel:\n  length: 30000\n")
    assert err.value.key == "channel.length"
    assert "line 4" in str(err.value)


@pytest.mark.parametrize("version", ["2", "null", "'1'"])
def test_unsupported_schema_version(version):
    with pytest.raises(UnsupportedSchemaVersion):
        parse_config(f"schema_version: {version}\nscenario: straight\n")


def test_full_round_trip():
    text = """
schema_version: 1
scenario: link
geometry: {a: 200um, b: 0.1mm}
materials:
  core: {eps_r: 800, tan_delta: 0.001}
  clad: paper-clad
band: {start: 90GHz, stop: 150GHz, points: 4}
solver: {cells_per_wavelength: 24, n_modes: 4, theta: 0.03, workers: 2}
channel: {length: 3cm, tan_delta: 0.002}
bend: {plane: in-plane-of-b, radius_reference: centerline, radii: [150um, 1mm]}
taper: {length: 2mm, segments: 16, launch_area_ratio: 2.5}
crosstalk: {length: 1mm}
output: {directory: out}
sweep: {variable: tan_delta, values: [0, 0.0005]}
"""
    cfg = parse_config(text)
    assert cfg.b_um == 100.0 and cfg.bend_radii_um == (150.0, 1000.0)
    assert cfg.core.material.eps_r == 800.0 and cfg.core.catalog_name is None
    again = parse_config(serialize(cfg))
    assert again == cfg
    assert again.digest() == cfg.digest()


def test_length_sweep_round_trip():
    cfg = parse_config(MINIMAL + "sweep: {variable: length, values: [1cm, 2.5mm]}\n")
    assert cfg.sweep_values == (10000.0, 2500.0)
    assert cfg.sweep_si == pytest.approx((0.01, 0.0025))
    assert parse_config(serialize(cfg)) == cfg


def test_inline_material_validation():
    with pytest.raises(ConfigError):
        parse_config(MINIMAL + "materials: {core: {eps_r: 0.2}}\n")
    with pytest.raises(UnknownKey):
        parse_config(MINIMAL + "materials: {core: {eps_r: 10, mu_r: 2}}\n")
    with pytest.raises(ConfigError):
        parse_config(MINIMAL + "materials: {core: vibranium}\n")


@pytest.mark.parametrize(
    "extra",
    [
        "sweep: {variable: radius, values: [50um]}\n",
        "sweep: {variable: length, values: []}\n",
        "sweep: {variable: length, values: [5]}\n",
        "solver: {cells_per_wavelength: 10}\n",
        "bend: {plane: diagonal}\n",
        "band: {start: 150GHz, stop: 90GHz}\n",
        "solver: {n_modes: 2.5}\n",
    ],
)
def test_invalid_values_rejected(extra):
    with pytest.raises(ConfigError):
        parse_config(MINIMAL + extra)


@pytest.mark.parametrize("text", ["", "- a\n- b\n", "a: [unclosed\n"])
def test_malformed_documents(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_load_from_file(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text(MINIMAL)
    assert load_config(p) == parse_config(MINIMAL)
