"""Command-line interface: configs, reports, exit codes, reproducibility."""

import json

import numpy as np
import pytest

from logsolve import Boundary, Grid
from logsolve.cli import diff_reports, load_config, main, read_field_csv, run
from logsolve.errors import ConfigError, SchemaMismatchError


def _base_config(mode=None, **extra):
    cfg = {
        "grid": {"dim": 1, "cells": [128], "box": [4.0], "boundary": "periodic"},
        "coefficients": {
            "V": {"kind": "constant", "value": 0.0},
            "Q": {
                "kind": "harmonic",
                "offset": 1.0,
                "terms": [
                    {"axis": 0, "type": "cos", "amplitude": 0.3, "harmonic": 1}
                ],
            },
        },
        "solver": {"max_iters": 500, "tol_residual": 1e-7, "seed": 1},
    }
    if mode is not None:
        cfg["mode"] = mode
    cfg.update(extra)
    return cfg


def _write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


def test_load_config_rejects_unknown_keys(tmp_path):
    cfg = _base_config()
    cfg["grd"] = cfg.pop("grid")
    with pytest.raises(ConfigError):
        load_config(_write_config(tmp_path, cfg))


def test_load_config_reports_json_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"grid": }')
    with pytest.raises(ConfigError) as exc:
        load_config(path)
    assert ":1:" in str(exc.value)


def test_solve_mode_writes_report(tmp_path):
    cfg_path = _write_config(tmp_path, _base_config())
    out = tmp_path / "out"
    assert run(cfg_path, out, "solve") == 0
    report = json.loads((out / "report.json").read_text())
    assert report["mode"] == "solve"
    assert report["n_solutions"] == 1
    sol = report["solutions"][0]
    assert sol["report"]["converged"] is True
    assert sol["energy_breakdown"]["j"] > 0.0
    assert (out / sol["field_file"]).exists()
    assert (out / "meta.json").exists()


def test_field_csv_roundtrip(tmp_path):
    cfg_path = _write_config(tmp_path, _base_config())
    out = tmp_path / "out"
    run(cfg_path, out, "solve")
    report = json.loads((out / "report.json").read_text())
    grid = Grid(1, (128,), (4.0,), Boundary.PERIODIC)
    u = read_field_csv(out / report["solutions"][0]["field_file"], grid)
    # 17 significant digits reproduce the doubles bit for bit
    bd = report["solutions"][0]["energy_breakdown"]
    from logsolve import constant_descriptor, energy, make_coefficients

    c = make_coefficients(_base_config()["coefficients"], grid)
    assert energy(u, c).j == bd["j"]


def test_mode_mismatch_is_config_error(tmp_path):
    cfg_path = _write_config(tmp_path, _base_config(mode="solve"))
    assert run(cfg_path, tmp_path / "out", "multistart") == 1


def test_invalid_config_exit_code(tmp_path):
    cfg = _base_config()
    cfg["coefficients"]["Q"] = {"kind": "constant", "value": -1.0}
    assert run(_write_config(tmp_path, cfg), tmp_path / "out", "solve") == 1


def test_gausson_mode(tmp_path):
    cfg = {
        "grid": {"dim": 1, "cells": [512], "box": [16.0], "boundary": "dirichlet"},
        "coefficients": {
            "V": {"kind": "constant", "value": 0.0},
            "Q": {"kind": "constant", "value": 1.0},
        },
        "solver": {"max_iters": 500, "tol_residual": 1e-7},
        "gausson": {"v0": 0.0, "q0": 1.0},
    }
    out = tmp_path / "out"
    assert run(_write_config(tmp_path, cfg), out, "gausson") == 0
    report = json.loads((out / "report.json").read_text())
    assert report["solutions"][0]["energy_breakdown"]["j"] == pytest.approx(
        2.40897, abs=1e-3
    )


def test_check_logsob_mode(tmp_path):
    cfg = {
        "grid": {"dim": 1, "cells": [256], "box": [16.0], "boundary": "periodic"},
        "coefficients": {
            "V": {"kind": "constant", "value": 0.0},
            "Q": {"kind": "constant", "value": 1.0},
        },
        "solver": {"seed": 2},
        "logsob": {"n_fields": 20, "a_values": [0.5, 1.0, 2.0]},
    }
    out = tmp_path / "out"
    assert run(_write_config(tmp_path, cfg), out, "check-logsob") == 0
    report = json.loads((out / "report.json").read_text())
    assert report["logsob"]["min_slack"] >= -1e-10


def test_p_solve_mode(tmp_path):
    cfg = _base_config(p=2.5)
    out = tmp_path / "out"
    assert run(_write_config(tmp_path, cfg), out, "p-solve") == 0
    report = json.loads((out / "report.json").read_text())
    assert abs(report["solutions"][0]["p_nehari_residual"]) < 1e-8


def test_p_solve_requires_p(tmp_path):
    cfg_path = _write_config(tmp_path, _base_config())
    assert run(cfg_path, tmp_path / "out", "p-solve") == 1


def test_reports_byte_identical(tmp_path):
    cfg_path = _write_config(tmp_path, _base_config())
    run(cfg_path, tmp_path / "a", "solve")
    run(cfg_path, tmp_path / "b", "solve")
    assert (tmp_path / "a/report.json").read_bytes() == (
        tmp_path / "b/report.json"
    ).read_bytes()
    assert (tmp_path / "a/field_000.csv").read_bytes() == (
        tmp_path / "b/field_000.csv"
    ).read_bytes()


def test_diff_reports(tmp_path):
    cfg_path = _write_config(tmp_path, _base_config())
    run(cfg_path, tmp_path / "a", "solve")
    run(cfg_path, tmp_path / "b", "solve")
    assert diff_reports(tmp_path / "a/report.json", tmp_path / "b/report.json") == []
    # perturb one float and watch the diff find it
    report = json.loads((tmp_path / "b/report.json").read_text())
    report["solutions"][0]["energy_breakdown"]["j"] += 1e-3
    (tmp_path / "b/report.json").write_text(json.dumps(report))
    diffs = diff_reports(tmp_path / "a/report.json", tmp_path / "b/report.json")
    assert any("energy_breakdown/j" in d["path"] for d in diffs)
    # but pass under a loose tolerance
    assert (
        diff_reports(tmp_path / "a/report.json", tmp_path / "b/report.json", tol=1e-2)
        == []
    )


def test_diff_schema_mismatch(tmp_path):
    (tmp_path / "a.json").write_text('{"x": 1.0}')
    (tmp_path / "b.json").write_text('{"y": 1.0}')
    with pytest.raises(SchemaMismatchError):
        diff_reports(tmp_path / "a.json", tmp_path / "b.json")


def test_main_entry_point(tmp_path):
    cfg_path = _write_config(tmp_path, _base_config())
    out = tmp_path / "out"
    assert main(["solve", "--config", str(cfg_path), "--out", str(out)]) == 0
    assert main(["diff", str(out / "report.json"), str(out / "report.json")]) == 0
