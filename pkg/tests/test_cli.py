"""Tests for the rwrc-lab command line."""

from argparse import Namespace

import orjson
import pytest
import yaml

from rwrc_lab.__main__ import (
    EXIT_CONFIG_ERROR,
    EXIT_FAILURE,
    EXIT_SUCCESS,
    build_experiment,
    main,
    parse_args,
)
from rwrc_lab.config import LabSettings


@pytest.fixture(autouse=True)
def clean_env(monkeypatch, tmp_path) -> None:
    """No settings file or RWRC_ variables leak into a test."""
    monkeypatch.delenv("CONFIG_PATH", raising=False)
    for name in ("RWRC_THREADS", "RWRC_OUTPUT_DIR", "RWRC_LOG_LEVEL", "RWRC_LOG_FORMAT"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)


def read_result(out_dir) -> dict:
    return orjson.loads((out_dir / "result.json").read_bytes())


class TestParseArgs:
    """Test argument parsing."""

    def test_version(self, capsys) -> None:
        with pytest.raises(SystemExit) as excinfo:
            parse_args(["--version"])
        assert excinfo.value.code == 0
        assert "rwrc-lab" in capsys.readouterr().out

    def test_command_required(self) -> None:
        with pytest.raises(SystemExit) as excinfo:
            parse_args([])
        assert excinfo.value.code == 2

    def test_seed_required_for_stochastic(self) -> None:
        """Stochastic subcommands need --seed."""
        with pytest.raises(SystemExit):
            parse_args(["sample", "--out", "x"])

    def test_list_flags(self) -> None:
        args = parse_args(["lifshitz", "--seed", "1", "--eps", "0.8,1,1.25", "--n-env", "10"])
        assert args.eps == [0.8, 1.0, 1.25]

    def test_bad_list(self) -> None:
        with pytest.raises(SystemExit):
            parse_args(["lifshitz", "--seed", "1", "--eps", "a,b", "--n-env", "10"])


class TestBuildExperiment:
    """Test the mapping each subcommand builds."""

    def test_cube(self) -> None:
        """--cube n is Q_n at α = 1."""
        args = parse_args(["chi-d", "--cube", "2", "--d", "2", "--p", "2"])
        data = build_experiment(args, LabSettings())
        assert data["box"] == {"d": 2, "alpha": 1.0, "G": [[-2.5, 2.5], [-2.5, 2.5]]}
        assert data["p"] == 2.0
        assert "eta" not in data
        assert data["restarts"] == LabSettings().chi_restarts

    def test_unset_flags_dropped(self) -> None:
        """Unset flags leave the model defaults in place."""
        args = parse_args(["sample", "--seed", "4", "--eta", "1.5"])
        data = build_experiment(args, LabSettings())
        assert data["model"] == {"kind": "tail", "eta": 1.5}
        assert data["box"]["G"] == [[0.0, 1.0]]

    def test_settings_defaults(self) -> None:
        """Walk counts and thresholds fall back to settings."""
        settings = LabSettings(walks_per_env=9, window_threshold=0.2)
        args = parse_args(["nonexit", "--seed", "1", "--horizons", "1,2", "--n-env", "3"])
        assert build_experiment(args, settings)["n_walks"] == 9
        args = parse_args(["regime", "--eta", "1", "--d", "1"])
        assert build_experiment(args, settings)["threshold"] == 0.2

    def test_compare_slopes(self) -> None:
        args = Namespace(
            command="compare-slopes",
            table="t.csv",
            predictor="lifshitz",
            eta=1.0,
            D=0.5,
            d=None,
            alpha=None,
            chi=2.0,
            cap=None,
        )
        data = build_experiment(args, LabSettings())
        assert data == {
            "kind": "compare-slopes",
            "table": "t.csv",
            "predictor": {"kind": "lifshitz", "eta": 1.0, "D": 0.5, "chi": 2.0},
        }


class TestMain:
    """Test exit codes and output of the CLI."""

    def test_regime(self, tmp_path) -> None:
        out = tmp_path / "regime"
        assert main(["regime", "--eta", "1", "--d", "1", "--out", str(out)]) == EXIT_SUCCESS
        assert read_result(out)["result"]["regime"] == "spread-out"

    def test_sample(self, tmp_path) -> None:
        out = tmp_path / "sample"
        code = main(["sample", "--seed", "3", "--alpha", "6", "--eta", "1", "--D", "0.5", "--out", str(out)])
        assert code == EXIT_SUCCESS
        assert (out / "field.json").exists()
        assert read_result(out)["config"]["seed"] == 3

    def test_schema_stdout(self, capsys) -> None:
        assert main(["schema"]) == EXIT_SUCCESS
        schema = orjson.loads(capsys.readouterr().out)
        assert "chi-d" in orjson.dumps(schema).decode("utf-8")

    def test_schema_file(self, tmp_path) -> None:
        target = tmp_path / "schema.json"
        assert main(["schema", "--out", str(target)]) == EXIT_SUCCESS
        assert orjson.loads(target.read_bytes())

    def test_runtime_failure(self, tmp_path) -> None:
        """A regime mismatch exits 1."""
        out = tmp_path / "predict"
        argv = ["predict", "--eta", "2", "--d", "1", "--t", "100", "--alpha", "2", "--chi-d-zd", "1", "--out", str(out)]
        assert main(argv) == EXIT_FAILURE
        assert (out / "error.json").exists()

    def test_run_invalid_file(self, tmp_path) -> None:
        """An invalid experiment file exits 2 and names the field."""
        config = tmp_path / "bad.yaml"
        config.write_text(yaml.safe_dump({"kind": "sample", "box": {"d": 1, "alpha": 6.0, "G": [[0, 1]]}, "model": {"kind": "tail", "eta": 1, "D": 0.5}}))
        out = tmp_path / "bad"
        assert main(["run", "--config", str(config), "--out", str(out)]) == EXIT_CONFIG_ERROR
        error = orjson.loads((out / "error.json").read_bytes())
        assert error["path"] == "seed"

    def test_run_file(self, tmp_path) -> None:
        config = tmp_path / "chi.yaml"
        config.write_text(yaml.safe_dump({"kind": "chi-d", "box": {"d": 1, "alpha": 6.0, "G": [[0, 1]]}, "p": 2.0}))
        out = tmp_path / "chi"
        assert main(["run", "--config", str(config), "--out", str(out)]) == EXIT_SUCCESS
        assert read_result(out)["result"]["oracle_relative_error"] < 1e-8

    def test_missing_settings_file(self, tmp_path, capsys) -> None:
        """An unreadable settings file exits 2."""
        code = main(["--settings", str(tmp_path / "absent.yaml"), "regime", "--eta", "1", "--d", "1"])
        assert code == EXIT_CONFIG_ERROR
        assert "Configuration error" in capsys.readouterr().err

    def test_default_output_dir(self, tmp_path) -> None:
        """Without --out, results go to ./results."""
        assert main(["regime", "--eta", "1", "--d", "2"]) == EXIT_SUCCESS
        assert (tmp_path / "results" / "result.json").exists()

    def test_run_file_settings_section(self, tmp_path, capsys) -> None:
        """A settings section in the experiment file configures the run."""
        config = tmp_path / "regime.yaml"
        config.write_text(yaml.safe_dump({"settings": {"threads": 3}, "kind": "regime", "eta": 1.0, "d": 1}))
        out = tmp_path / "regime"
        assert main(["run", "--config", str(config), "--out", str(out)]) == EXIT_SUCCESS
        assert "threads=3" in capsys.readouterr().err
