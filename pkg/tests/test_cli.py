"""End-to-end tests for the cstar command line (app/cli.py)."""

import csv
import json

import pytest

from app.algebras import ScalarAlgebra
from app.cli import EXIT_PASS, EXIT_PROPERTY_FAILURE, EXIT_USAGE, build_parser, dispatch, load_run_config
from app.config import Config, config
from app.datasets import Dataset, save_dataset
from app.exceptions import ConfigurationException
from app.experiments import planted_measure_problem
from app.serialization import write_model


@pytest.fixture
def scalar_csv(tmp_path, scalar_dataset):
    return str(save_dataset(scalar_dataset, tmp_path / "scalar.csv"))


@pytest.fixture
def grid_csv(tmp_path, grid_dataset):
    return str(save_dataset(grid_dataset, tmp_path / "grid.csv"))


def read_report(out, name):
    return json.loads((out / f"{name}.json").read_text())


class TestUsageErrors:
    """Argument and configuration errors exit with code 2."""

    def test_help(self, capsys):
        assert dispatch(["--help"]) == EXIT_PASS
        assert "prop-convex" in capsys.readouterr().out

    def test_unknown_subcommand(self):
        assert dispatch(["train-everything", "--seed", "1"]) == EXIT_USAGE

    def test_unknown_flag(self, tmp_path):
        assert dispatch(["prop-convex", "--seed", "1", "--bogus", "--out", str(tmp_path)]) == EXIT_USAGE

    def test_missing_seed(self, tmp_path):
        assert dispatch(["prop-convex", "--out", str(tmp_path)]) == EXIT_USAGE

    def test_missing_dataset(self, tmp_path):
        assert dispatch(["rkhm-fit", "--seed", "1", "--data", str(tmp_path / "missing.csv"), "--out", str(tmp_path)]) == EXIT_USAGE

    def test_dataset_required(self, tmp_path):
        assert dispatch(["net-train", "--seed", "1", "--out", str(tmp_path)]) == EXIT_USAGE

    def test_bad_threshold_syntax(self, tmp_path):
        assert dispatch(["prop-convex", "--seed", "1", "--threshold", "nonsense", "--out", str(tmp_path)]) == EXIT_USAGE

    def test_zero_ridge_without_interpolation(self, tmp_path, scalar_csv):
        argv = ["rkhm-fit", "--seed", "1", "--data", scalar_csv, "--ridge", "0", "--out", str(tmp_path / "out")]
        assert dispatch(argv) == EXIT_USAGE

    def test_measure_opt_needs_both_paths(self, tmp_path, scalar_csv):
        assert dispatch(["measure-opt", "--seed", "1", "--data", scalar_csv, "--out", str(tmp_path)]) == EXIT_USAGE

    def test_invalid_environment(self, tmp_path):
        original = Config.CSTAR_THREADS
        try:
            Config.CSTAR_THREADS = 0
            assert dispatch(["prop-convex", "--seed", "1", "--segments", "2", "--out", str(tmp_path)]) == EXIT_USAGE
        finally:
            Config.CSTAR_THREADS = original


class TestRunConfig:
    """Merging the JSON config file with flags."""

    def test_config_file_and_flag_override(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"seed": 3, "trials": 5, "dimensions": [2, 3], "thresholds": {"violations": 0}}))
        args = build_parser().parse_args(["norm-compare", "--config", str(path), "--trials", "7", "--threshold", "mean_ratio_d2=2"])
        run_config = load_run_config(args)
        assert run_config.seed == 3
        assert run_config.trials == 7
        assert run_config.dimensions == [2, 3]
        assert run_config.thresholds == {"violations": 0.0, "mean_ratio_d2": 2.0}

    def test_missing_config_file(self, tmp_path):
        args = build_parser().parse_args(["prop-convex", "--config", str(tmp_path / "none.json")])
        with pytest.raises(FileNotFoundError):
            load_run_config(args)

    def test_invalid_value(self):
        args = build_parser().parse_args(["prop-convex", "--seed", "1", "--segments", "0"])
        with pytest.raises(ConfigurationException, match="Invalid run configuration"):
            load_run_config(args)

    def test_environment_defaults(self):
        run_config = load_run_config(build_parser().parse_args(["prop-convex", "--seed", "1"]))
        assert run_config.out == config.CSTAR_OUTPUT_DIR
        assert run_config.threads == config.CSTAR_THREADS


class TestPropertySubcommands:
    """Property experiments through the CLI."""

    def test_prop_convex(self, tmp_path):
        assert dispatch(["prop-convex", "--seed", "7", "--segments", "10", "--out", str(tmp_path)]) == EXIT_PASS
        report = read_report(tmp_path, "convexity")
        assert report["passed"] is True
        assert report["seed"] == 7
        assert (tmp_path / "convexity_summary.csv").exists()

    def test_reports_byte_identical(self, tmp_path):
        for name in ("a", "b"):
            argv = ["prop-convex", "--seed", "7", "--segments", "10", "--out", str(tmp_path / name)]
            assert dispatch(argv) == EXIT_PASS
        assert (tmp_path / "a" / "convexity.json").read_bytes() == (tmp_path / "b" / "convexity.json").read_bytes()

    def test_threshold_override_fails(self, tmp_path):
        argv = ["norm-compare", "--seed", "0", "--trials", "5", "--dimensions", "2", "--threshold", "mean_ratio_d2=0.5", "--out", str(tmp_path)]
        assert dispatch(argv) == EXIT_PROPERTY_FAILURE
        assert read_report(tmp_path, "norm_comparison")["passed"] is False

    def test_prop_poly(self, tmp_path):
        argv = ["prop-poly", "--seed", "1", "--depth", "2", "--basis-size", "2", "--out", str(tmp_path)]
        assert dispatch(argv) == EXIT_PASS
        assert read_report(tmp_path, "expressiveness")["metrics"]["degree_L2"] == 2.0

    def test_algebra_check_single_algebra(self, tmp_path):
        argv = ["algebra-check", "--seed", "1", "--trials", "3", "--algebra", '{"kind": "dense_matrix", "size": 2}', "--out", str(tmp_path)]
        assert dispatch(argv) == EXIT_PASS
        assert len(read_report(tmp_path, "algebra_check")["parameters"]["descriptors"]) == 1

    def test_equivariance(self, tmp_path):
        argv = ["equivariance", "--seed", "0", "--trials", "2", "--group", "cyclic", "--group-order", "5", "--out", str(tmp_path)]
        assert dispatch(argv) == EXIT_PASS
        assert "error_cyclic5" in read_report(tmp_path, "equivariance")["metrics"]

    def test_measure_opt_planted(self, tmp_path):
        assert dispatch(["measure-opt", "--seed", "2", "--out", str(tmp_path)]) == EXIT_PASS
        measure = json.loads((tmp_path / "measure.json").read_text())
        assert sum(measure["weights"]) == pytest.approx(1.0)


class TestRkhmSubcommands:
    """rkhm-fit, rkhm-predict and mmd."""

    def test_fit_then_predict(self, tmp_path, scalar_csv):
        fit_out = tmp_path / "fit"
        assert dispatch(["rkhm-fit", "--seed", "1", "--data", scalar_csv, "--out", str(fit_out)]) == EXIT_PASS
        assert read_report(fit_out, "rkhm_regression")["passed"] is True
        model = fit_out / "rkhm_model.json"
        assert model.exists()

        predict_out = tmp_path / "predict"
        argv = ["rkhm-predict", "--seed", "1", "--model", str(model), "--data", scalar_csv, "--out", str(predict_out)]
        assert dispatch(argv) == EXIT_PASS
        assert (predict_out / "predictions.json").exists()
        assert read_report(predict_out, "rkhm_predict")["metrics"]["n"] == 8.0

    def test_fit_grid_dataset_with_threads(self, tmp_path, grid_csv):
        argv = ["rkhm-fit", "--seed", "1", "--data", grid_csv, "--threads", "2", "--gamma", "0.5", "--out", str(tmp_path)]
        assert dispatch(argv) == EXIT_PASS

    def test_mmd_same_data(self, tmp_path, matrix_dataset):
        data = str(save_dataset(matrix_dataset, tmp_path / "matrix.json"))
        assert dispatch(["mmd", "--seed", "1", "--data", data, "--data2", data, "--out", str(tmp_path)]) == EXIT_PASS
        assert read_report(tmp_path, "mmd")["metrics"]["mmd"] == pytest.approx(0.0, abs=1e-5)


class TestNetSubcommands:
    """net-train, net-eval and measure-opt on a trained model."""

    def test_zero_steps_keeps_model(self, tmp_path, scalar_csv):
        argv = ["net-train", "--seed", "4", "--data", scalar_csv, "--steps", "0", "--widths", "3", "--out", str(tmp_path)]
        assert dispatch(argv) == EXIT_PASS
        assert (tmp_path / "net_init.json").read_bytes() == (tmp_path / "net_model.json").read_bytes()
        with (tmp_path / "loss_trace.csv").open() as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["step", "loss"]
        assert len(rows) == 2

    def test_train_then_eval(self, tmp_path, scalar_csv):
        train_out = tmp_path / "train"
        argv = ["net-train", "--seed", "4", "--data", scalar_csv, "--steps", "50", "--step-size", "0.05", "--out", str(train_out)]
        assert dispatch(argv) == EXIT_PASS
        report = read_report(train_out, "net_train")
        assert report["metrics"]["final_loss"] < report["metrics"]["initial_loss"]

        eval_out = tmp_path / "eval"
        argv = ["net-eval", "--seed", "4", "--model", str(train_out / "net_model.json"), "--data", scalar_csv, "--out", str(eval_out)]
        assert dispatch(argv) == EXIT_PASS
        assert read_report(eval_out, "net_eval")["metrics"]["loss"] == pytest.approx(report["metrics"]["final_loss"])

    def test_grid_basis_net(self, tmp_path, grid_csv):
        argv = ["net-train", "--seed", "4", "--data", grid_csv, "--steps", "5", "--basis", "2", "--out", str(tmp_path)]
        assert dispatch(argv) == EXIT_PASS
        assert json.loads((tmp_path / "net_model.json").read_text())["basis"] is not None

    def test_basis_needs_grid(self, tmp_path, scalar_csv):
        argv = ["net-train", "--seed", "4", "--data", scalar_csv, "--basis", "2", "--out", str(tmp_path)]
        assert dispatch(argv) == EXIT_USAGE

    def test_measure_opt_on_model(self, tmp_path):
        net, X, Y, _ = planted_measure_problem(seed=5)
        model = write_model(tmp_path / "grid_net.json", net.to_payload())
        data = save_dataset(Dataset(ScalarAlgebra(), X[:, :, 0].real, Y), tmp_path / "targets.json")
        argv = ["measure-opt", "--seed", "5", "--steps", "300", "--model", str(model), "--data", str(data), "--out", str(tmp_path / "out")]
        assert dispatch(argv) == EXIT_PASS
        assert (tmp_path / "out" / "measure.json").exists()

    def test_measure_opt_rejects_algebra_targets(self, tmp_path, grid_dataset):
        train_data = str(save_dataset(grid_dataset, tmp_path / "grid.json"))
        assert dispatch(["net-train", "--seed", "1", "--data", train_data, "--steps", "0", "--out", str(tmp_path / "net")]) == EXIT_PASS
        argv = ["measure-opt", "--seed", "1", "--model", str(tmp_path / "net" / "net_model.json"), "--data", train_data, "--out", str(tmp_path)]
        assert dispatch(argv) == EXIT_USAGE
