import json
import math

import pytest

from hopt.cli import main


SPACE_DOC = {
    "lr": {"type": "float", "low": 1e-5, "high": 1e-1, "log": True},
    "units": {"type": "int", "low": 16, "high": 256, "multiple_of": 16},
}


@pytest.fixture
def space_file(tmp_path):
    path = tmp_path / "space.json"
    path.write_text(json.dumps(SPACE_DOC))
    return str(path)


class TestTune:
    def test_sphere_converges(self, tmp_path, capsys):
        out = tmp_path / "result.json"
        code = main(
            [
                "tune",
                "--objective",
                "sphere",
                "--dims",
                "2",
                "--steps",
                "300",
                "--seed",
                "7",
                "--result-out",
                str(out),
            ]
        )
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["best"]["value"] <= 0.01
        assert doc["no_successful_evaluation"] is False
        assert doc["statistics"]["count"] == 300
        assert "best value:" in capsys.readouterr().out

    def test_pure_random_fraction(self, tmp_path):
        hist = tmp_path / "hist.csv"
        code = main(
            [
                "tune",
                "--objective",
                "sphere",
                "--steps",
                "30",
                "--seed",
                "1",
                "--random-fraction",
                "1.0",
                "--history-out",
                str(hist),
            ]
        )
        assert code == 0
        lines = hist.read_text().strip().split("\n")
        origins = {line.split(",")[1] for line in lines[1:]}
        assert origins == {"random"}

    def test_zero_steps_is_empty_success(self, tmp_path, capsys):
        out = tmp_path / "result.json"
        code = main(
            ["tune", "--objective", "sphere", "--steps", "0", "--result-out", str(out)]
        )
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["best"] is None and doc["no_successful_evaluation"] is True
        assert "no successful evaluation" in capsys.readouterr().out

    def test_conflicting_budgets_usage_error(self, capsys):
        code = main(
            ["tune", "--objective", "sphere", "--steps", "5", "--runtime", "1s"]
        )
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_budget_usage_error(self):
        assert main(["tune", "--objective", "sphere"]) == 2

    def test_missing_objective_usage_error(self):
        assert main(["tune", "--steps", "5"]) == 2

    def test_unknown_objective_rejected_by_argparse(self, capsys):
        assert main(["tune", "--objective", "nope", "--steps", "5"]) == 2

    def test_bad_workers_usage_error(self):
        assert (
            main(["tune", "--objective", "sphere", "--steps", "5", "--workers", "fast"])
            == 2
        )

    def test_history_reproducible_apart_from_timestamps(self, tmp_path):
        def run(path):
            assert (
                main(
                    [
                        "tune",
                        "--objective",
                        "sphere",
                        "--steps",
                        "40",
                        "--seed",
                        "3",
                        "--history-out",
                        str(path),
                    ]
                )
                == 0
            )
            rows = [line.split(",") for line in path.read_text().strip().split("\n")]
            return [row[:-2] for row in rows]  # drop started_at/ended_at

        assert run(tmp_path / "a.csv") == run(tmp_path / "b.csv")


class TestSampleReport:
    def test_log_decades_roughly_uniform(self, tmp_path, space_file):
        out = tmp_path / "samples.csv"
        code = main(
            ["sample-report", "--space", space_file, "--n", "20000", "--out", str(out), "--seed", "2"]
        )
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "lr,units"
        assert len(lines) == 20001
        decades = [0, 0, 0, 0]
        for line in lines[1:]:
            lr = float(line.split(",")[0])
            decades[min(int(math.log10(lr / 1e-5)), 3)] += 1
        for c in decades:
            assert abs(c / 20000 - 0.25) < 0.02

    def test_int_samples_on_grid(self, tmp_path, space_file):
        out = tmp_path / "samples.csv"
        main(["sample-report", "--space", space_file, "--n", "500", "--out", str(out)])
        for line in out.read_text().strip().split("\n")[1:]:
            units = int(line.split(",")[1])
            assert 16 <= units <= 256 and units % 16 == 0

    def test_n_zero_header_only(self, tmp_path, space_file):
        out = tmp_path / "samples.csv"
        assert main(["sample-report", "--space", space_file, "--n", "0", "--out", str(out)]) == 0
        assert out.read_text() == "lr,units\n"

    def test_negative_n_usage_error(self, tmp_path, space_file):
        out = tmp_path / "samples.csv"
        assert main(["sample-report", "--space", space_file, "--n", "-1", "--out", str(out)]) == 2

    def test_missing_space_file(self, tmp_path):
        out = tmp_path / "samples.csv"
        code = main(
            ["sample-report", "--space", str(tmp_path / "none.json"), "--n", "1", "--out", str(out)]
        )
        assert code == 2


class TestCompare:
    def test_single_trial_row_and_summary(self, tmp_path, capsys):
        out = tmp_path / "cmp.csv"
        code = main(
            [
                "compare",
                "--objective",
                "sphere",
                "--dims",
                "2",
                "--steps",
                "60",
                "--trials",
                "1",
                "--seeds",
                "5",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        printed = capsys.readouterr().out
        assert printed.startswith("seed,two_phase_best,random_best,two_phase_win")
        assert "# win_rate=" in printed
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "seed,two_phase_best,random_best,two_phase_win"
        assert lines[1].split(",")[0] == "5"

    def test_zero_trials_usage_error(self):
        assert main(["compare", "--objective", "sphere", "--steps", "10", "--trials", "0"]) == 2


class TestArgparseBehavior:
    def test_no_command(self):
        assert main([]) == 2

    def test_unknown_command(self):
        assert main(["frobnicate"]) == 2
