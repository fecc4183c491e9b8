import csv
import importlib
import json
from pathlib import Path

import pytest

from groupoid_avg.cli.main import build_parser, main
from groupoid_avg.config.settings import RUN_CONFIG, get_run_config

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def write_scenario(tmp_path, eta=0.04, **extra):
    data = {
        "groupoid": {"generator": "pair", "n": 2},
        "rep": {"matrices": [[[1.0]], [[1.0]], [[1.0]], [[1.0 + eta]]]},
    }
    data.update(extra)
    path = tmp_path / f"eta_{eta}.json"
    path.write_text(json.dumps(data))
    return str(path)


def run(tmp_path, *argv):
    return main(["--output-dir", str(tmp_path / "runs"), *argv])


def read_json(path):
    return json.loads(path.read_text())


def test_gen_pair(tmp_path, capsys):
    assert run(tmp_path, "gen", "pair", "--n", "3") == 0
    data = read_json(tmp_path / "runs" / "pair.json")
    assert len(data["arrows"]) == 9
    assert "9 arrows" in capsys.readouterr().out


def test_gen_bundle(tmp_path):
    out = tmp_path / "bundle.json"
    assert run(tmp_path, "gen", "bundle", "--groups", "z2,z3", "-o", str(out)) == 0
    assert len(read_json(out)["arrows"]) == 5


def test_gen_action(tmp_path):
    assert run(tmp_path, "gen", "action", "--group", "s3", "--action", "trivial", "--points", "2") == 0
    assert len(read_json(tmp_path / "runs" / "action.json")["arrows"]) == 12


def test_gen_rejects_zero_objects(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run(tmp_path, "gen", "pair", "--n", "0")
    assert exc.value.code == 2


def test_gen_rejects_unknown_group(tmp_path, capsys):
    assert run(tmp_path, "gen", "bundle", "--groups", "q2") == 2
    assert "Error" in capsys.readouterr().err


def test_check_passes(tmp_path, capsys):
    report = tmp_path / "check.json"
    assert run(tmp_path, "check", write_scenario(tmp_path), "--report", str(report)) == 0
    out = capsys.readouterr().out
    assert "normalizing_identity" in out
    assert "rep_shapes" in out
    assert all(r["ok"] for r in read_json(report)["reports"])


def test_check_starved_orbit(tmp_path, capsys):
    path = tmp_path / "starved.json"
    path.write_text(json.dumps({"groupoid": {"generator": "bundle", "groups": "z2,z3"},
                                "cutoff": [1.0, 0.0]}))
    assert run(tmp_path, "check", str(path)) == 2
    assert "FAIL" in capsys.readouterr().out


def test_check_malformed_scenario(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{\n  oops\n}")
    assert run(tmp_path, "check", str(path)) == 2
    assert f"{path}:2" in capsys.readouterr().err


def test_avg_converges(tmp_path):
    trace = tmp_path / "trace.csv"
    assert run(tmp_path, "avg", write_scenario(tmp_path), "--trace", str(trace)) == 0
    with open(trace, newline="") as f:
        rows = list(csv.DictReader(f))
    assert rows[0]["i"] == "0"
    assert float(rows[-1]["r"]) <= 1e-10
    assert rows[-1]["step"] == ""
    report = read_json(tmp_path / "runs" / "report.json")
    assert report["ledger"]["ok"]
    assert report["summary"]["reason"] == "converged"
    assert read_json(tmp_path / "runs" / "summary.json")["certified"] is True


def test_avg_refuses_far_input(tmp_path, capsys):
    assert run(tmp_path, "avg", write_scenario(tmp_path, eta=0.1)) == 3
    assert "Refused" in capsys.readouterr().out
    report = read_json(tmp_path / "runs" / "report.json")
    assert report["refused"] is True
    assert report["gate"]["is_near"] is False


def test_avg_forced(tmp_path, capsys):
    assert run(tmp_path, "avg", write_scenario(tmp_path, eta=0.1), "--force") == 0
    assert "not claimed" in capsys.readouterr().out
    assert read_json(tmp_path / "runs" / "summary.json")["certified"] is False


def test_avg_not_converged(tmp_path):
    assert run(tmp_path, "avg", write_scenario(tmp_path), "--max-iter", "1") == 4
    assert read_json(tmp_path / "runs" / "summary.json")["reason"] == "max_iter"


def test_avg_scenario_run_settings(tmp_path):
    path = write_scenario(tmp_path, run={"max_iter": 1})
    assert run(tmp_path, "avg", path) == 4
    assert run(tmp_path, "avg", path, "--max-iter", "20") == 0


def test_avg_recovery_report(tmp_path):
    path = tmp_path / "gen.json"
    path.write_text(json.dumps({
        "groupoid": {"generator": "pair", "n": 3},
        "bundle": {"dims": [2, 2, 2]},
        "rep": {"generator": {"base_rep": "identity", "magnitude": 0.002, "seed": 7}},
    }))
    out = tmp_path / "rep_final.json"
    assert run(tmp_path, "avg", str(path), "--save-rep", str(out)) == 0
    recovery = read_json(tmp_path / "runs" / "report.json")["recovery"]
    assert recovery["distance_from_start"] <= recovery["bound"]
    assert recovery["distance_to_base"] > 0
    assert len(read_json(out)["rep"]["matrices"]) == 9


def test_avg_without_rep(tmp_path, capsys):
    path = tmp_path / "norep.json"
    path.write_text(json.dumps({"groupoid": {"generator": "pair", "n": 2}}))
    assert run(tmp_path, "avg", str(path)) == 2
    assert "no 'rep' section" in capsys.readouterr().err


@pytest.mark.parametrize("mode", ["contract2-verify", "contract1-verify", "defect-consistency"])
def test_cohomology_modes(tmp_path, mode):
    path = write_scenario(tmp_path, coefficients={"kind": "factored"})
    assert run(tmp_path, "cohomology", path, "--mode", mode, "--seed", "3") == 0
    result = read_json(tmp_path / "runs" / "cohomology.json")
    assert result["passed"] is True
    assert result["mode"] == mode


def test_cohomology_with_action_coefficients(tmp_path):
    path = tmp_path / "gauge.json"
    path.write_text(json.dumps({
        "groupoid": {"generator": "action", "group": "z3"},
        "bundle": {"dims": [2, 2, 2]},
        "rep": {"generator": {"base_rep": "gauge", "gauge_seed": 2}},
        "coefficients": {"kind": "action"},
    }))
    assert run(tmp_path, "cohomology", str(path)) == 0
    result = read_json(tmp_path / "runs" / "cohomology.json")
    assert result["is_cocycle"] is True
    assert result["residual"] <= 1e-11


def test_metric_command(tmp_path, capsys):
    path = tmp_path / "metric_scenario.json"
    path.write_text(json.dumps({
        "groupoid": {"generator": "pair", "n": 2},
        "metric": {"kind": "gram", "matrices": [[[1.0]], [[4.0]]]},
        "rep": {"matrices": [[[1.0]], [[1.0]], [[1.0]], [[1.0]]]},
    }))
    assert run(tmp_path, "metric", str(path), "--subset", "0,1") == 0
    saved = read_json(tmp_path / "runs" / "metric.json")
    assert saved["metric"]["matrices"] == [[[2.5]], [[2.5]]]
    report = read_json(tmp_path / "runs" / "metric_report.json")
    assert report["isometric"] is True
    assert report["idempotence_defect"] == 0.0
    assert "isometry on S: yes" in capsys.readouterr().out


def test_metric_support_violation(tmp_path):
    path = tmp_path / "pair3.json"
    path.write_text(json.dumps({"groupoid": {"generator": "pair", "n": 3},
                                "rep": {"generator": {"base_rep": "identity"}}}))
    assert run(tmp_path, "metric", str(path), "--subset", "0") == 2


def test_parser_requires_command():
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args([])
    assert exc.value.code == 2


def test_config_overrides(monkeypatch):
    monkeypatch.setitem(RUN_CONFIG, "tol", 1e-6)
    cfg = get_run_config(output_dir="elsewhere", tol=None)
    assert cfg["tol"] == 1e-6
    assert cfg["output_dir"] == "elsewhere"
    cfg["tol"] = 0.0
    assert RUN_CONFIG["tol"] == 1e-6


@pytest.mark.parametrize("name", sorted(p.name for p in SCENARIOS.glob("*.json")))
def test_shipped_scenarios_check(tmp_path, name):
    assert run(tmp_path, "check", str(SCENARIOS / name)) == 0


def test_shipped_eta_scenarios(tmp_path):
    assert run(tmp_path, "avg", str(SCENARIOS / "eta_near.json")) == 0
    assert run(tmp_path, "avg", str(SCENARIOS / "eta_far.json")) == 3


def test_shipped_subset_metric(tmp_path):
    assert run(tmp_path, "metric", str(SCENARIOS / "bundle_subset.json")) == 0
    report = read_json(tmp_path / "runs" / "metric_report.json")
    assert report["subset"] == [0]
    assert report["isometric"]


NON_INVARIANT = {"haar": {"kind": "weights", "values": [1.0, 2.0, 1.0, 1.0]}}


@pytest.mark.parametrize("argv", [
    ["avg"],
    ["cohomology", "--mode", "defect-consistency"],
    ["cohomology", "--mode", "contract2-verify"],
    ["metric"],
    ["check"],
])
def test_non_invariant_haar_system_is_refused(tmp_path, capsys, argv):
    path = write_scenario(tmp_path, **NON_INVARIANT)
    assert run(tmp_path, argv[0], path, *argv[1:]) == 2
    captured = capsys.readouterr()
    assert "left_invariance" in captured.out
    assert not (tmp_path / "runs" / "trace.csv").exists()


def test_avg_seed_overrides_generated_rep(tmp_path):
    path = tmp_path / "generated.json"
    path.write_text(json.dumps({
        "groupoid": {"generator": "pair", "n": 3},
        "rep": {"generator": {"base_rep": "identity", "magnitude": 0.002, "seed": 1}},
    }))
    assert run(tmp_path, "avg", str(path), "--report", "from_file.json") == 0
    assert run(tmp_path, "avg", str(path), "--seed", "1", "--report", "seed1.json") == 0
    assert run(tmp_path, "avg", str(path), "--seed", "2", "--report", "seed2.json") == 0
    runs = tmp_path / "runs"
    from_file = read_json(runs / "from_file.json")["gate"]["r"]
    assert read_json(runs / "seed1.json")["gate"]["r"] == from_file
    assert read_json(runs / "seed2.json")["gate"]["r"] != from_file


@pytest.mark.parametrize("package", ["cli", "config", "cohomology", "geometry", "groupoid", "linalg",
                                     "metrics", "reps", "storage"])
def test_subpackages_are_documented(package):
    module = importlib.import_module(f"groupoid_avg.{package}")
    assert module.__doc__ and module.__doc__.strip()
