import json

import pytest

from ecoplanner.cli import main
from ecoplanner.harness import bundled_scenario_path


def write_fast_scenario(tmp_path, **overrides):
    """Benchmark scenario trimmed to a 3-budget sweep for CLI runs."""
    raw = json.loads(bundled_scenario_path().read_text())
    raw["sweep"] = {"min": 0, "max": 320, "steps": 3}
    raw["out_dir"] = str(tmp_path / "out")
    raw.update(overrides)
    path = tmp_path / "fast.scenario"
    path.write_text(json.dumps(raw))
    return path


def test_version(capsys):
    assert main(["--version"]) == 0
    assert capsys.readouterr().out.strip()


def test_no_subcommand_is_validation_error(capsys):
    assert main([]) == 1


def test_unknown_subcommand(capsys):
    assert main(["frobnicate"]) == 1


def test_simulate(tmp_path, capsys):
    scen = write_fast_scenario(tmp_path)
    assert main(["simulate", "--scenario", str(scen)]) == 0
    out = capsys.readouterr().out
    assert "backend" in out
    traj = tmp_path / "out" / "trajectory.csv"
    assert traj.exists()
    assert traj.read_text().startswith("t_s,x_m,v_mps,a_mps2")


def test_out_override(tmp_path, capsys):
    scen = write_fast_scenario(tmp_path)
    alt = tmp_path / "elsewhere"
    assert main(["simulate", "--scenario", str(scen), "--out", str(alt)]) == 0
    assert (alt / "trajectory.csv").exists()


def test_feasible_set_csv(tmp_path, capsys):
    scen = write_fast_scenario(tmp_path)
    assert main(["feasible-set", "--scenario", str(scen)]) == 0
    out_dir = tmp_path / "out"
    for name in ("cloud.csv", "hull_vertices.csv", "pareto.csv"):
        assert (out_dir / name).exists()
    cloud = (out_dir / "cloud.csv").read_text().strip().splitlines()
    assert cloud[0] == "travel_time_s,emissions_g,route,style,condition"
    assert len(cloud) == 1 + 36


def test_feasible_set_json(tmp_path, capsys):
    scen = write_fast_scenario(tmp_path)
    assert main(["feasible-set", "--scenario", str(scen), "--format", "json"]) == 0
    payload = json.loads((tmp_path / "out" / "feasible_set.json").read_text())
    assert payload["eco_route"] == "approach-ring-exit"
    assert len(payload["cloud"]) == 36
    assert len(payload["pareto"]) == 2


def test_estimate_theta(tmp_path, capsys):
    scen = write_fast_scenario(tmp_path)
    assert main(["estimate-theta", "--scenario", str(scen),
                 "--t-report", "130.0"]) == 0
    got = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert 0.0 <= got["emission_weight"] <= 1.0
    assert got["residual"] >= 0.0


def test_estimate_theta_out_of_range(tmp_path, capsys):
    scen = write_fast_scenario(tmp_path)
    assert main(["estimate-theta", "--scenario", str(scen),
                 "--t-report", "20.0"]) == 1
    assert "validation error" in capsys.readouterr().err


def test_estimate_theta_requires_flag(tmp_path, capsys):
    scen = write_fast_scenario(tmp_path)
    assert main(["estimate-theta", "--scenario", str(scen)]) == 1


def test_mechanism(tmp_path, capsys):
    scen = write_fast_scenario(tmp_path)
    assert main(["mechanism", "--scenario", str(scen), "--budget", "100"]) == 0
    for name in ("mechanism_optimal.csv", "mechanism_baseline.csv"):
        lines = (tmp_path / "out" / name).read_text().strip().splitlines()
        assert len(lines) == 1 + 20
    out = capsys.readouterr().out
    assert "optimal" in out and "baseline" in out


def test_mechanism_budget_required(tmp_path, capsys):
    scen = write_fast_scenario(tmp_path)
    assert main(["mechanism", "--scenario", str(scen)]) == 1
    assert main(["mechanism", "--scenario", str(scen), "--budget", "-5"]) == 1


def test_sweep_and_plot(tmp_path, capsys):
    scen = write_fast_scenario(tmp_path)
    assert main(["sweep", "--scenario", str(scen)]) == 0
    sweep_csv = tmp_path / "out" / "sweep.csv"
    assert sweep_csv.exists()
    assert len(sweep_csv.read_text().strip().splitlines()) == 1 + 6
    assert main(["plot", "--scenario", str(scen)]) == 0
    assert (tmp_path / "out" / "sweep.svg").exists()


def test_sweep_json_format(tmp_path, capsys):
    scen = write_fast_scenario(tmp_path)
    assert main(["sweep", "--scenario", str(scen), "--format", "json"]) == 0
    rows = json.loads((tmp_path / "out" / "sweep.json").read_text())
    assert len(rows) == 6
    assert set(rows[0]) == {
        "budget", "mechanism", "compliance_ratio", "total_emissions_g",
        "mean_travel_time_s", "norm_emissions", "norm_travel_time",
        "realized_spend",
    }


def test_missing_scenario_file(capsys):
    assert main(["sweep", "--scenario", "/does/not/exist"]) == 1
    assert "validation error" in capsys.readouterr().err


def test_invalid_scenario_content(tmp_path, capsys):
    bad = tmp_path / "bad.scenario"
    bad.write_text("{}")
    assert main(["sweep", "--scenario", str(bad)]) == 1


def test_seed_override_validation(tmp_path, capsys):
    scen = write_fast_scenario(tmp_path)
    assert main(["sweep", "--scenario", str(scen), "--seed", "-1"]) == 1


def test_default_notes_echoed(tmp_path, capsys):
    raw = json.loads(bundled_scenario_path().read_text())
    del raw["sweep"]
    raw["sweep"] = {"min": 0, "max": 100, "steps": 2}
    del raw["epsilon"]
    raw["out_dir"] = str(tmp_path / "out")
    scen = tmp_path / "partial.scenario"
    scen.write_text(json.dumps(raw))
    assert main(["sweep", "--scenario", str(scen)]) == 0
    assert "default applied: epsilon" in capsys.readouterr().out
