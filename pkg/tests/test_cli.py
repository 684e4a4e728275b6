import json
import math
from pathlib import Path

import numpy as np
import pytest

from consistency_lab.cli import main
from consistency_lab.measures import FiniteMeasure
from consistency_lab.reports import dumps_canonical, write_json
from consistency_lab.scenarios import (
    scenario_kolmogorov_family,
    scenario_nested_alternatives,
    scenario_sine_indistinguishable,
)


def F(*weights):
    return FiniteMeasure(np.array(weights, dtype=float))


@pytest.fixture
def scenario_file(tmp_path):
    def write(scenario, name="scenario.json"):
        path = tmp_path / name
        write_json(path, scenario.to_json_dict())
        return path

    return write


def read_tree(root: Path) -> dict:
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


# -- distinguish -----------------------------------------------------------------------


def test_distinguish_separated_exit_zero(scenario_file, capsys):
    path = scenario_file(scenario_sine_indistinguishable(1))
    code = main(["distinguish", "--scenario", str(path)])
    out = capsys.readouterr().out
    assert code == 0
    margin = float(out.splitlines()[0].split("=")[1])
    assert margin == pytest.approx(1 / math.pi, abs=1e-12)
    assert "verdict=separated" in out


def test_distinguish_zero_margin_exit_two(scenario_file, capsys):
    scenario = scenario_sine_indistinguishable(2)
    scenario.alternative = scenario.alternative[1:]  # keep only the aligned frequency
    path = scenario_file(scenario)
    code = main(["distinguish", "--scenario", str(path)])
    out = capsys.readouterr().out
    assert code == 2
    assert "margin=0" in out


def test_distinguish_missing_file(tmp_path, capsys):
    code = main(["distinguish", "--scenario", str(tmp_path / "absent.json")])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_malformed_json_reports_position(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"name": oops}')
    code = main(["bound", "--scenario", str(path)])
    err = capsys.readouterr().err
    assert code == 1
    assert "line 1" in err and "column" in err


# -- bound -----------------------------------------------------------------------------


def test_bound_prints_hull_and_mixtures(scenario_file, capsys):
    path = scenario_file(scenario_kolmogorov_family([0.4], n_grid=[16]))
    code = main(["bound", "--scenario", str(path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "hull_variation=0.2" in out
    assert "kraft_bound=0.8" in out


def test_bound_identical_sets_is_one(tmp_path, capsys):
    data = {
        "name": "same",
        "model": {"type": "finite"},
        "hypothesis": [{"weights": [0.5, 0.5]}],
        "alternative": [{"weights": [0.5, 0.5]}],
    }
    path = tmp_path / "same.json"
    path.write_text(dumps_canonical(data))
    assert main(["bound", "--scenario", str(path)]) == 0
    assert "kraft_bound=1" in capsys.readouterr().out


def test_bound_disjoint_supports_is_zero(tmp_path, capsys):
    data = {
        "name": "disjoint",
        "model": {"type": "finite"},
        "hypothesis": [{"weights": [1.0, 0.0]}],
        "alternative": [{"weights": [0.0, 1.0]}],
    }
    path = tmp_path / "disjoint.json"
    path.write_text(dumps_canonical(data))
    assert main(["bound", "--scenario", str(path)]) == 0
    assert "kraft_bound=0\n" in capsys.readouterr().out


# -- simulate --------------------------------------------------------------------------


def test_simulate_writes_tables_and_manifest(scenario_file, tmp_path, capsys):
    path = scenario_file(scenario_kolmogorov_family([0.4], n_grid=[16, 32]))
    out_dir = tmp_path / "out"
    code = main(
        ["simulate", "--scenario", str(path), "--out", str(out_dir), "--seed", "5",
         "--reps", "300"]
    )
    assert code == 0
    names = {p.name for p in out_dir.iterdir()}
    assert {"errors.csv", "ks.csv", "separation.csv", "manifest.json"} <= names
    manifest = (out_dir / "manifest.json").read_text()
    assert '"seed": 5' in manifest
    assert '"replications": 300' in manifest
    first = (out_dir / "errors.csv").read_text().splitlines()
    assert first[0].startswith("# command=")


def test_simulate_zero_replications_is_validation_error(scenario_file, tmp_path, capsys):
    path = scenario_file(scenario_kolmogorov_family([0.4], n_grid=[16]))
    code = main(
        ["simulate", "--scenario", str(path), "--out", str(tmp_path / "o"), "--reps", "0"]
    )
    assert code == 1
    assert "replications" in capsys.readouterr().err


def test_simulate_same_seed_byte_identical(scenario_file, tmp_path):
    path = scenario_file(scenario_kolmogorov_family([0.4], n_grid=[16]))
    d1, d2 = tmp_path / "a", tmp_path / "b"
    for d in (d1, d2):
        assert main(
            ["simulate", "--scenario", str(path), "--out", str(d), "--seed", "9",
             "--reps", "200"]
        ) == 0
    assert read_tree(d1) == read_tree(d2)


def test_simulate_plots_flag_emits_svg(scenario_file, tmp_path):
    path = scenario_file(scenario_kolmogorov_family([0.4], n_grid=[16, 32, 64]))
    out_dir = tmp_path / "plots"
    assert main(
        ["simulate", "--scenario", str(path), "--out", str(out_dir), "--reps", "200",
         "--plots"]
    ) == 0
    svgs = list(out_dir.glob("*.svg"))
    assert svgs and all(s.read_text().startswith("<svg") for s in svgs)


# -- schedule --------------------------------------------------------------------------


def test_schedule_writes_schedule_and_curve(scenario_file, tmp_path):
    scenario = scenario_nested_alternatives(
        [F(0.9, 0.1), F(0.1, 0.9)], n_max=256, replications=200,
        k_grid=list(range(0, 257, 32)),
    )
    path = scenario_file(scenario)
    out_dir = tmp_path / "sched"
    code = main(
        ["schedule", "--scenario", str(path), "--out", str(out_dir), "--seed", "3",
         "--reps", "200"]
    )
    assert code == 0
    schedule = json.loads((out_dir / "schedule.json").read_text())
    assert schedule["blocks"][0]["start"] == 1
    assert (out_dir / "discernibility.csv").exists()


def test_schedule_zero_margin_piece_exit_two(tmp_path, capsys):
    data = {
        "name": "bad-piece",
        "model": {"type": "finite"},
        "hypothesis": [{"weights": [0.5, 0.5]}],
        "alternative": [{"weights": [0.9, 0.1]}, {"weights": [0.5, 0.5]}],
        "sim": {"replications": 200, "n_grid": [64], "k_grid": [0, 32, 64]},
        "schedule": {"exponents": [], "onsets": []},
    }
    path = tmp_path / "bad.json"
    path.write_text(dumps_canonical(data))
    code = main(["schedule", "--scenario", str(path), "--out", str(tmp_path / "o")])
    err = capsys.readouterr().err
    assert code == 2
    assert "piece 2" in err


def test_schedule_nmax_below_first_boundary_exit_one(tmp_path, capsys):
    # tiny exponents force a first boundary far beyond the requested horizon
    data = {
        "name": "short-horizon",
        "model": {"type": "finite"},
        "hypothesis": [{"weights": [0.5, 0.5]}],
        "alternative": [{"weights": [0.9, 0.1]}, {"weights": [0.1, 0.9]}],
        "sim": {"replications": 200, "n_grid": [16], "k_grid": [0, 8, 16]},
        "schedule": {"exponents": [0.01, 0.01], "onsets": [8, 8]},
    }
    path = tmp_path / "short.json"
    path.write_text(dumps_canonical(data))
    code = main(["schedule", "--scenario", str(path), "--out", str(tmp_path / "o")])
    assert code == 1
    assert "first block boundary" in capsys.readouterr().err


def test_workers_env_fallback(scenario_file, tmp_path, monkeypatch):
    path = scenario_file(scenario_kolmogorov_family([0.4], n_grid=[16]))
    monkeypatch.setenv("CONSISTENCY_LAB_WORKERS", "2")
    out_dir = tmp_path / "env"
    assert main(
        ["simulate", "--scenario", str(path), "--out", str(out_dir), "--reps", "200"]
    ) == 0
    manifest = (out_dir / "manifest.json").read_text()
    assert '"workers": 2' in manifest
