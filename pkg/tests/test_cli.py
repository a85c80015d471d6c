"""Thin-client CLI: outputs, overrides, exit codes, determinism."""

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from melonfield.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def write_config(tmp_path: Path, name: str, payload: dict) -> str:
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


class TestLoCommand:
    def test_csv_contents(self, runner, tmp_path):
        out = tmp_path / "lo.csv"
        result = runner.invoke(
            main, ["lo", "-D", "3", "--coupling", "0", "--coupling", "0.1", "-o", str(out)]
        )
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# schema_version: melonfield/1")
        assert lines[1].startswith("# config: ")
        assert lines[2] == "D,lambda,alpha_im,log_z,g2"
        zero = lines[3].split(",")
        assert zero[2] == "0.0" and zero[3] == "inf" and zero[4] == "2.0"
        row = lines[4].split(",")
        assert abs(float(row[4]) - 1.7660738) < 1e-6
        assert abs(float(row[2]) + 0.1974530) < 1e-6

    def test_stdout_default(self, runner):
        result = runner.invoke(main, ["lo", "--coupling", "0.1"])
        assert result.exit_code == 0
        assert result.output.startswith("# schema_version:")
        assert "D,lambda," in result.output

    def test_negative_coupling_exit_2_with_field(self, runner, tmp_path):
        config = write_config(tmp_path, "lo.json", {"couplings": [-0.1]})
        result = runner.invoke(main, ["lo", "--config", config])
        assert result.exit_code == 2
        assert "couplings" in result.output

    def test_unknown_key_exit_2(self, runner, tmp_path):
        config = write_config(tmp_path, "lo.json", {"couplings": [0.1], "junk": True})
        result = runner.invoke(main, ["lo", "--config", config])
        assert result.exit_code == 2
        assert "junk" in result.output

    def test_flags_override_config(self, runner, tmp_path):
        config = write_config(tmp_path, "lo.json", {"couplings": [0.5]})
        out = tmp_path / "lo.csv"
        result = runner.invoke(
            main, ["lo", "--config", config, "--coupling", "0.1", "-o", str(out)]
        )
        assert result.exit_code == 0
        assert ",0.1," in out.read_text().splitlines()[3]


class TestSaddleCommand:
    def test_writes_solution_and_histogram(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["saddle", "-D", "3", "-N", "2", "--coupling", "0.1", "--seed", "1",
             "--output-dir", str(tmp_path)],
        )
        assert result.exit_code == 0, result.output
        assert "converged=True" in result.output
        solution = json.loads((tmp_path / "solution.json").read_text())
        assert solution["schema_version"] == "melonfield/1"
        assert solution["params"] == {"colors": 3, "size": 2, "coupling": 0.1}
        assert solution["residual_norm"] <= 1e-12
        assert len(solution["spectrum"]) == 3
        assert "config" in solution
        histogram = (tmp_path / "histogram.csv").read_text().splitlines()
        assert histogram[0].startswith("# schema_version")
        assert histogram[2] == "bin_left,bin_right,count,empirical_density,law_density"
        assert len(histogram) >= 4

    def test_n1_spectrum_is_collapse_point(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["saddle", "-D", "3", "-N", "1", "--coupling", "0.1",
             "--output-dir", str(tmp_path)],
        )
        assert result.exit_code == 0
        solution = json.loads((tmp_path / "solution.json").read_text())
        entry = solution["spectrum"][0][0]
        assert abs(entry["re"]) < 1e-12
        assert abs(entry["im"] + 0.19745304908213347) < 1e-12

    def test_exhausted_budget_exits_3(self, runner, tmp_path):
        config = write_config(
            tmp_path,
            "saddle.json",
            {
                "model": {"colors": 3, "size": 2, "coupling": 0.1},
                "solver": {"tolerance": 1e-30, "max_iterations": 1},
            },
        )
        result = runner.invoke(
            main, ["saddle", "--config", config, "--output-dir", str(tmp_path)]
        )
        assert result.exit_code == 3
        assert "residual" in result.output


class TestSeriesCommand:
    def test_json_output(self, runner, tmp_path):
        out = tmp_path / "series.json"
        result = runner.invoke(main, ["series", "-D", "3", "--order", "12", "-o", str(out)])
        assert result.exit_code == 0
        body = json.loads(out.read_text())
        assert body["per_colors"][0]["equal"] is True
        assert body["tutte_equals_planar"] is True
        assert body["tutte_series"]["coefficients"][:5] == ["1", "-2", "9", "-54", "378"]

    def test_order_zero(self, runner):
        result = runner.invoke(main, ["series", "--order", "0"])
        assert result.exit_code == 0
        body = json.loads(result.output)
        assert body["per_colors"][0]["g2_series"]["coefficients"] == ["2"]


class TestSdCommand:
    def test_quadrature_output(self, runner, tmp_path):
        out = tmp_path / "sd.json"
        result = runner.invoke(
            main,
            ["sd", "-D", "3", "-N", "1", "--coupling", "0.05",
             "--ks", "0", "--ks", "1", "-o", str(out)],
        )
        assert result.exit_code == 0, result.output
        body = json.loads(out.read_text())
        assert len(body["reports"]) == 6
        for entry in body["reports"]:
            assert entry["normalized"] <= 1e-6

    def test_mc_metadata_fields(self, runner, tmp_path):
        out = tmp_path / "sd.json"
        result = runner.invoke(
            main,
            ["sd", "-D", "3", "-N", "2", "--coupling", "0.05", "--ks", "1",
             "--color", "0", "--estimator", "mc", "--chains", "2",
             "--steps", "3000", "--seed", "4", "-o", str(out)],
        )
        assert result.exit_code == 0, result.output
        body = json.loads(out.read_text())
        entry = body["reports"][0]
        assert entry["std_error"] > 0.0
        assert entry["phase_mean"] is not None

    def test_estimator_failure_exits_4(self, runner, tmp_path):
        config = write_config(
            tmp_path,
            "sd.json",
            {
                "model": {"colors": 3, "size": 1, "coupling": 0.05},
                "ks": [1],
                "colors": [0],
                "quadrature": {"tolerance": 1e-30},
                "include_leading": False,
            },
        )
        result = runner.invoke(main, ["sd", "--config", config])
        assert result.exit_code == 4


class TestThreadsEnvVar:
    def test_env_var_feeds_sd_request(self, runner, tmp_path):
        out = tmp_path / "sd.json"
        result = runner.invoke(
            main,
            ["sd", "-D", "3", "-N", "1", "--coupling", "0.05", "--ks", "0",
             "--color", "0", "-o", str(out)],
            env={"MELONFIELD_THREADS": "2"},
        )
        assert result.exit_code == 0, result.output
        body = json.loads(out.read_text())
        assert body["config"]["threads"] == 2


class TestHermiteCommand:
    def test_roots_and_nlo(self, runner):
        result = runner.invoke(
            main, ["hermite", "-N", "2", "-D", "3", "--coupling", "0.1"]
        )
        assert result.exit_code == 0
        body = json.loads(result.output)
        assert abs(body["roots"][1] - 0.7071067811865476) < 1e-12
        assert abs(body["nlo"]["values"][1] - 0.6937129433613966) < 1e-12


class TestDeterminism:
    def _saddle_args(self, outdir):
        return ["saddle", "-D", "3", "-N", "4", "--coupling", "0.1", "--seed", "7",
                "--output-dir", str(outdir)]

    def test_saddle_reruns_byte_identical(self, runner, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        assert runner.invoke(main, self._saddle_args(first)).exit_code == 0
        assert runner.invoke(main, self._saddle_args(second)).exit_code == 0
        for name in ("solution.json", "histogram.csv"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_lo_and_series_reruns_byte_identical(self, runner, tmp_path):
        for args, name in [
            (["lo", "--coupling", "0.1", "--coupling", "0.25"], "lo.csv"),
            (["series", "--order", "10"], "series.json"),
        ]:
            a, b = tmp_path / ("a_" + name), tmp_path / ("b_" + name)
            assert runner.invoke(main, args + ["-o", str(a)]).exit_code == 0
            assert runner.invoke(main, args + ["-o", str(b)]).exit_code == 0
            assert a.read_bytes() == b.read_bytes()

    def test_sd_mc_reruns_byte_identical(self, runner, tmp_path):
        args = ["sd", "-D", "3", "-N", "2", "--coupling", "0.05", "--ks", "1",
                "--color", "0", "--estimator", "mc", "--chains", "2",
                "--steps", "2000", "--seed", "9"]
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert runner.invoke(main, args + ["-o", str(a)]).exit_code == 0
        assert runner.invoke(main, args + ["-o", str(b)]).exit_code == 0
        assert a.read_bytes() == b.read_bytes()
