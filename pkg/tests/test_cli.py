import csv
import json
import subprocess
import sys

import pytest

from sociallearn.cli import main
from sociallearn.harness import generate_scenario
from sociallearn.model import NumericFault, save_scenario


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "triangle.json"
    save_scenario(generate_scenario("triangle-consistent", horizon=40), path)
    return path


class TestGen:
    def test_writes_loadable_scenario(self, tmp_path):
        out = tmp_path / "scn.json"
        rc = main(["gen", "--variant", "two-groups", "--out", str(out)])
        assert rc == 0
        payload = json.loads(out.read_text())
        assert payload["graph"]["n_agents"] == 10

    def test_gen_respects_overrides(self, tmp_path):
        out = tmp_path / "scn.json"
        rc = main(["gen", "--variant", "triangle-consensus", "--out", str(out),
                   "--horizon", "123", "--seed", "9"])
        assert rc == 0
        payload = json.loads(out.read_text())
        assert payload["horizon"] == 123
        assert payload["seed"] == 9

    def test_unknown_variant_rejected(self, tmp_path, capsys):
        with pytest.raises(SystemExit):
            main(["gen", "--variant", "hexagon", "--out", str(tmp_path / "x.json")])


class TestRun:
    def test_outputs_written(self, scenario_file, tmp_path, capsys):
        out_dir = tmp_path / "out"
        rc = main(["run", str(scenario_file), "--out-dir", str(out_dir)])
        assert rc == 0
        csv_path = out_dir / "triangle_trajectory.csv"
        json_path = out_dir / "triangle_summary.json"
        assert csv_path.exists() and json_path.exists()
        summary = json.loads(json_path.read_text())
        assert summary["horizon"] == 40
        assert len(summary["agents"]) == 3

    def test_horizon_and_seed_overrides(self, scenario_file, tmp_path):
        out_dir = tmp_path / "out"
        rc = main(["run", str(scenario_file), "--out-dir", str(out_dir),
                   "--horizon", "7", "--seed", "99"])
        assert rc == 0
        summary = json.loads((out_dir / "triangle_summary.json").read_text())
        assert summary["horizon"] == 7
        assert summary["seed"] == 99

    def test_thin_controls_csv(self, scenario_file, tmp_path):
        out_dir = tmp_path / "out"
        rc = main(["run", str(scenario_file), "--out-dir", str(out_dir),
                   "--thin", "20"])
        assert rc == 0
        with open(out_dir / "triangle_trajectory.csv", newline="") as fh:
            steps = sorted({int(r["step"]) for r in csv.DictReader(fh)})
        assert steps == [0, 20, 40]

    def test_backend_flag(self, scenario_file, tmp_path):
        out_dir = tmp_path / "out"
        rc = main(["run", str(scenario_file), "--out-dir", str(out_dir),
                   "--backend", "python"])
        assert rc == 0
        summary = json.loads((out_dir / "triangle_summary.json").read_text())
        assert summary["backend"] == "python"


class TestAnalyze:
    def test_prints_report(self, scenario_file, capsys):
        rc = main(["analyze", str(scenario_file)])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["components"] == [[0, 1], [2]]
        assert payload["consistency"]["globally_consistent"] is True

    def test_optionally_writes_file(self, scenario_file, tmp_path, capsys):
        out_dir = tmp_path / "reports"
        rc = main(["analyze", str(scenario_file), "--out-dir", str(out_dir)])
        assert rc == 0
        payload = json.loads((out_dir / "triangle_analysis.json").read_text())
        assert payload["perron"][0] == [0.5, 0.5]


class TestCompare:
    def test_forces_all_algorithms(self, tmp_path, capsys):
        cfg = generate_scenario("triangle-consensus", horizon=30)
        cfg = cfg.override(algorithms=("noncooperative",))
        path = tmp_path / "solo.json"
        save_scenario(cfg, path)
        out_dir = tmp_path / "out"
        rc = main(["compare", str(path), "--out-dir", str(out_dir)])
        assert rc == 0
        with open(out_dir / "solo_compare.csv", newline="") as fh:
            algs = {r["algorithm"] for r in csv.DictReader(fh)}
        assert algs == {"noncooperative", "static", "adaptive", "adaptive-global"}


class TestMonteCarlo:
    def test_writes_aggregate(self, scenario_file, tmp_path, capsys):
        out_dir = tmp_path / "out"
        rc = main(["montecarlo", str(scenario_file), "--seeds", "3",
                   "--out-dir", str(out_dir)])
        assert rc == 0
        payload = json.loads((out_dir / "triangle_montecarlo.json").read_text())
        assert len(payload["seeds"]) == 3
        assert "hit_rate" in payload["agents"][0]["algorithms"]["adaptive"]


class TestExitCodes:
    def test_missing_file(self, tmp_path, capsys):
        rc = main(["run", str(tmp_path / "nope.json")])
        assert rc == 1
        assert "error" in capsys.readouterr().err

    def test_invalid_json(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(["analyze", str(path)]) == 1

    def test_unknown_key(self, scenario_file, tmp_path, capsys):
        payload = json.loads(scenario_file.read_text())
        payload["extra"] = True
        bad = tmp_path / "extra.json"
        bad.write_text(json.dumps(payload))
        assert main(["run", str(bad)]) == 1
        assert "extra" in capsys.readouterr().err

    def test_validation_failure_lists_violations(self, scenario_file, tmp_path,
                                                 capsys):
        payload = json.loads(scenario_file.read_text())
        payload["likelihoods"][0]["table"][0][0] = 0.9
        bad = tmp_path / "badrow.json"
        bad.write_text(json.dumps(payload))
        assert main(["run", str(bad)]) == 1
        err = capsys.readouterr().err
        assert "invalid scenario" in err
        assert "likelihoods[0]" in err

    def test_numeric_fault_maps_to_two(self, scenario_file, monkeypatch, capsys):
        def boom(cfg, backend=None):
            raise NumericFault("forced")

        monkeypatch.setattr("sociallearn.cli.run_scenario", boom)
        assert main(["run", str(scenario_file)]) == 2
        assert "numeric fault" in capsys.readouterr().err


class TestEntryPoint:
    def test_module_invocation(self, tmp_path):
        out = tmp_path / "scn.json"
        proc = subprocess.run(
            [sys.executable, "-m", "sociallearn.cli", "gen",
             "--variant", "triangle-consistent", "--out", str(out)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert out.exists()
