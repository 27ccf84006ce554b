import json

import pytest

from drwsim.cli import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, main
from drwsim.config import parse_config
from drwsim.errors import StageError
from drwsim.runner import run_scenario


def _manifest(out):
    return json.loads((out / "manifest.json").read_text())


def test_modes_command(tmp_path, capsys):
    out = tmp_path / "m"
    assert main(["modes", "--freq", "110GHz", "--n-modes", "3", "--out", str(out)]) == EXIT_OK
    fields = sorted(p.name for p in out.glob("field_*.csv"))
    assert fields == [f"field_110.0GHz_mode{i}.csv" for i in range(3)]
    man = _manifest(out)
    assert man["status"] == "ok" and man["scenario"] == "modes"
    for art in man["artifacts"]:
        p = out / art["path"]
        assert p.exists() and p.stat().st_size == art["bytes"] > 0
    rows = (out / "modes.csv").read_text().splitlines()
    assert len(rows) == 4 and ",LSE," in rows[1]
    assert "modes.csv" in capsys.readouterr().out


def test_bad_config_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("schema_version: 1\nscenario: straight\ngeometry:\n  lenght: 3cm\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "lenght" in err and "line 4" in err


def test_missing_config_file_exits_2(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.yaml"), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_bad_worker_count_exits_2(tmp_path):
    assert main(["sweep", "loss-table", "--workers", "0", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_solver_failure_exits_3_and_records_stage(tmp_path, capsys):
    out = tmp_path / "tiny"
    # a 1 um core needs far more cells than the grid cap allows
    code = main(["modes", "--a", "1um", "--b", "1um", "--freq", "150GHz", "--out", str(out)])
    assert code == EXIT_SOLVER
    man = _manifest(out)
    assert man["status"] == "error" and man["error"]["stage"] == "solve"
    assert "stage 'solve' failed" in capsys.readouterr().err


def test_stage_error_from_library_call(tmp_path):
    cfg = parse_config("schema_version: 1\nscenario: modes\ngeometry: {a: 1um, b: 1um}\n")
    with pytest.raises(StageError):
        run_scenario(cfg, tmp_path)


def test_workers_do_not_change_results(tmp_path):
    args = ["sweep", "loss-table", "--start", "90GHz", "--stop", "150GHz", "--points", "4", "--seed-metadata"]
    a, b = tmp_path / "w1", tmp_path / "w2"
    assert main([*args, "--workers", "1", "--out", str(a)]) == EXIT_OK
    assert main([*args, "--workers", "2", "--out", str(b)]) == EXIT_OK
    assert (a / "loss_table.csv").read_bytes() == (b / "loss_table.csv").read_bytes()
    assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()
    header = (a / "loss_table.csv").read_text().splitlines()[0]
    assert header == "tan_delta,90.0GHz,110.0GHz,130.0GHz,150.0GHz"


def test_straight_sweep_writes_touchstone(tmp_path):
    out = tmp_path / "s"
    code = main(["sweep", "straight", "--start", "100GHz", "--stop", "110GHz", "--points", "2",
                 "--values", "0", "0.002", "--out", str(out)])
    assert code == EXIT_OK
    names = {a["path"] for a in _manifest(out)["artifacts"]}
    assert {"straight_tan_delta_0.0.s2p", "straight_tan_delta_0.002.s2p", "straight.csv"} <= names
    text = (out / "straight_tan_delta_0.002.s2p").read_text()
    assert "config sha256" in text and "# GHz S RI R 50" in text
