import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from msem.cli import RunConfig, main


def _run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def test_project_writes_cochains(tmp_path, capsys):
    assert _run(tmp_path, "project", "--form", "cubic", "--order", "2") == 0
    data = json.loads((tmp_path / "project.json").read_text())
    np.testing.assert_allclose(data["pi"]["coefficients"], [-0.25, 0.25], atol=1e-15)
    assert {"pi", "pi_dual", "pi_star", "pi_dual_star"} <= set(data)
    rows = list(csv.reader((tmp_path / "project.csv").open()))
    assert rows[0][:2] == ["x", "exact"] and len(rows) == 202
    assert json.loads((tmp_path / "project.config.json").read_text())["order"] == 2
    assert "cochains" in json.loads(capsys.readouterr().out)


def test_derivative_and_incidence_text(tmp_path):
    assert _run(tmp_path, "derivative", "--dim", "2", "--order", "2") == 0
    data = json.loads((tmp_path / "derivative.json").read_text())
    assert data["dd_max"] == 0.0
    lines = (tmp_path / "incidence.txt").read_text().splitlines()
    assert all(len(line.split()) == 3 for line in lines)


def test_hodge_star_under_a_map(tmp_path):
    assert _run(tmp_path, "hodge-star", "--dim", "2", "--order", "2", "--map", "annulus") == 0
    H = np.loadtxt(tmp_path / "hodge_matrix.csv", delimiter=",")
    assert H.shape == (9, 9)


def test_decompose_flow(tmp_path, capsys):
    assert _run(tmp_path, "decompose", "--gamma", "4", "--order", "1", "--quad-order", "12") == 0
    amps = json.loads(capsys.readouterr().out)["amplitudes"]
    assert amps == pytest.approx([-1.0])


def test_solve_and_convergence(tmp_path):
    assert _run(tmp_path, "solve", "--dim", "2", "--order", "3", "--quad-order", "12") == 0
    assert json.loads((tmp_path / "solve.json").read_text())["residual"] < 1e-10
    assert _run(tmp_path, "convergence", "--levels", "4") == 0
    rows = list(csv.DictReader((tmp_path / "convergence.csv").open()))
    assert len(rows) == 12
    last = rows[3]
    assert abs(float(last["observed_order"]) - 2.0) < 0.2


def test_potential_flow_command(tmp_path, capsys):
    assert _run(tmp_path, "potential-flow", "--gamma", "10") == 0
    out = json.loads(capsys.readouterr().out)
    assert out["alpha"] == pytest.approx(2.5) and out["pairing"] == pytest.approx(20.0)
    assert (tmp_path / "velocity.csv").exists()


def test_complex_info_hole(tmp_path):
    assert _run(tmp_path, "complex-info", "--complex", "hole") == 0
    info = json.loads((tmp_path / "complex_info.json").read_text())
    assert info["betti"] == [1, 1, 0]
    assert info["harmonic_chains"]["1"] == [[1, -1, 0, 0, 1, 1, -1, 1, -1, 0, 0, -1]]


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"complex": "grid", "cells": [2, 2], "dim": 2}))
    assert main(["complex-info", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    info = json.loads((tmp_path / "complex_info.json").read_text())
    assert info["cell_counts"] == [9, 12, 4]
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["complex-info", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_bad_input_exit_codes(tmp_path, capsys):
    assert _run(tmp_path, "project", "--order", "0") == 2
    assert _run(tmp_path, "project", "--form", "nope") == 2
    assert _run(tmp_path, "project", "--dim", "2", "--form", "cubic") == 2
    assert "error" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["unknown-command"])


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig("project", dim=4)
    with pytest.raises(ValueError):
        RunConfig("project", grid="chebyshev")
    with pytest.raises(ValueError):
        RunConfig.from_mapping({"command": "project", "x": 1})
    assert RunConfig("project").threads == 1


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "msem", "complex-info", "--complex", "annulus", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["betti"] == [1, 1, 0]


def test_constant_form_projections_coincide(tmp_path):
    assert _run(tmp_path, "project", "--form", "constant", "--order", "4") == 0
    rows = np.loadtxt(tmp_path / "project.csv", delimiter=",", skiprows=1)
    np.testing.assert_allclose(rows[:, 2:], 1.0, atol=1e-12)


def test_four_projections_differ_for_sin3pi(tmp_path):
    assert _run(tmp_path, "project", "--order", "8") == 0
    rows = np.loadtxt(tmp_path / "project.csv", delimiter=",", skiprows=1)
    curves = rows[:, 2:].T
    assert curves.shape[0] == 4
    for i in range(4):
        for j in range(i + 1, 4):
            assert np.abs(curves[i] - curves[j]).max() > 1e-6


def test_output_is_deterministic(tmp_path):
    args = ["potential-flow", "--gamma", "4", "--seed", "3", "--out", str(tmp_path)]
    assert main(args) == 0
    first = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    assert main(args) == 0
    assert first == {p.name: p.read_bytes() for p in tmp_path.iterdir()}
