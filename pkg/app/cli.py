"""Command-line dispatch for the property experiments, RKHM fits and C*-algebra nets.

Exit codes: 0 when every threshold holds, 1 on a property failure, 2 on a
usage, configuration or data error.
"""

import argparse
import csv
import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from app.algebra import is_positive
from app.algebras import GridFunctionAlgebra, build_descriptor
from app.algebras.base import AlgebraDescriptor
from app.config import config
from app.datasets import Dataset, load_dataset, save_dataset
from app.exceptions import (
    ConfigurationException,
    CStarException,
    DatasetException,
    DescriptorMismatchException,
    InvalidDescriptorException,
    InvalidKernelException,
    ShapeMismatchException,
)
from app.experiments import (
    check_ceiling,
    default_descriptors,
    run_algebra_check,
    run_convexity,
    run_equivariance,
    run_expressiveness,
    run_measure_optimization,
    run_norm_comparison,
    run_rkhm_regression,
    write_report,
)
from app.kernels import AKernel
from app.models import ExperimentReport, NetPayload, RegressorPayload, RunConfig, Threshold
from app.net import CStarNet, build_activation, lift_inputs, monomial_evaluation, train
from app.rkhm import DiscreteAMeasure, RkhmRegressor, mmd
from app.serialization import read_model, write_model

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_PROPERTY_FAILURE = 1
EXIT_USAGE = 2

LOG_FORMAT = '{"timestamp": "%(asctime)s", "level": "%(levelname)s", "name": "%(name)s", "message": "%(message)s"}'

# paths that must exist before a subcommand runs
REQUIRED_PATHS = {
    "rkhm-fit": ("data",),
    "rkhm-predict": ("model", "data"),
    "mmd": ("data", "data2"),
    "net-train": ("data",),
    "net-eval": ("model", "data"),
}


def configure_logging() -> None:
    logging.basicConfig(
        level=getattr(logging, config.CSTAR_LOG, logging.INFO),
        format=LOG_FORMAT,
        datefmt='%Y-%m-%d %H:%M:%S'
    )


def _json_argument(value: str) -> Any:
    try:
        return json.loads(value)
    except json.JSONDecodeError as e:
        raise argparse.ArgumentTypeError(f"invalid JSON: {e.msg}")


def _threshold_argument(value: str) -> tuple:
    metric, sep, limit = value.partition("=")
    if not sep or not metric:
        raise argparse.ArgumentTypeError(f"expected METRIC=VALUE, got {value!r}")
    try:
        return metric, float(limit)
    except ValueError:
        raise argparse.ArgumentTypeError(f"threshold value must be a number, got {limit!r}")


def _int_list(value: str) -> List[int]:
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value!r}")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per subcommand.

    Every flag defaults to None so that unset flags fall back to the
    ``--config`` file and then to RunConfig defaults.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration file")
    common.add_argument("--seed", type=int, help="Random seed (required)")
    common.add_argument("--out", help="Output directory for reports and artifacts")
    common.add_argument("--threads", type=int, help="Worker threads for data-parallel loops")
    common.add_argument("--algebra", type=_json_argument, help='Algebra descriptor as JSON, e.g. \'{"kind": "dense_matrix", "size": 2}\'')
    common.add_argument(
        "--threshold", dest="thresholds", action="append", type=_threshold_argument,
        metavar="METRIC=VALUE", help="Override (or add) a pass threshold",
    )

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--data", help="Dataset file (CSV or JSON)")
    data.add_argument("--format", choices=["csv", "json"], help="Dataset format (default: by extension)")

    kernel = argparse.ArgumentParser(add_help=False)
    kernel.add_argument("--kernel", type=_json_argument, help="Kernel specification as JSON")
    kernel.add_argument("--gamma", type=float, help="Gaussian kernel bandwidth")

    net = argparse.ArgumentParser(add_help=False)
    net.add_argument("--model", help="Model file")
    net.add_argument("--steps", type=int, help="Optimization steps")

    parser = argparse.ArgumentParser(prog="cstar", description="C*-algebraic machine learning experiments")
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    sub = subparsers.add_parser("algebra-check", parents=[common], help="C*-algebra and Hilbert-module axioms")
    sub.add_argument("--trials", type=int)

    sub = subparsers.add_parser("rkhm-fit", parents=[common, data, kernel], help="Fit RKHM ridge regression")
    sub.add_argument("--ridge", type=float)
    sub.add_argument("--interpolation", action="store_true", default=None, help="Allow ridge = 0")
    sub.add_argument("--test-fraction", dest="test_fraction", type=float)

    subparsers.add_parser("rkhm-predict", parents=[common, data, net], help="Predict with a fitted RKHM regressor")

    sub = subparsers.add_parser("mmd", parents=[common, data, kernel], help="A-valued MMD between two datasets")
    sub.add_argument("--data2", help="Second dataset")

    sub = subparsers.add_parser("net-train", parents=[common, data, net], help="Train a C*-algebra net")
    sub.add_argument("--widths", type=_int_list, help="Hidden widths, comma separated")
    sub.add_argument("--activation", choices=["identity", "linear", "relu", "tanh"])
    sub.add_argument("--slope", type=float)
    sub.add_argument("--step-size", dest="step_size", type=float)
    sub.add_argument("--basis", type=int, help="Monomial basis size (grid algebras)")

    subparsers.add_parser("net-eval", parents=[common, data, net], help="Evaluate a C*-algebra net on a dataset")
    subparsers.add_parser("measure-opt", parents=[common, data, net], help="Optimize the averaging measure P")

    sub = subparsers.add_parser("prop-poly", parents=[common], help="Polynomial degree of slice outputs")
    sub.add_argument("--depth", type=int)
    sub.add_argument("--basis-size", dest="basis_size", type=int)

    sub = subparsers.add_parser("prop-convex", parents=[common], help="Convexity of the measure-averaged objective")
    sub.add_argument("--segments", type=int)

    sub = subparsers.add_parser("norm-compare", parents=[common], help="Operator vs Hilbert-Schmidt norm")
    sub.add_argument("--dimensions", type=_int_list)
    sub.add_argument("--trials", type=int)

    sub = subparsers.add_parser("equivariance", parents=[common], help="Group-equivariance of group-algebra nets")
    sub.add_argument("--trials", type=int)
    sub.add_argument("--group", choices=["cyclic", "symmetric", "dihedral"])
    sub.add_argument("--group-order", dest="group_order", type=int)
    return parser


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """
    Merge the JSON config file with the parsed flags and validate.

    Raises:
        FileNotFoundError: If the config file or a required input file is missing
        ConfigurationException: If the merged configuration is invalid
    """
    values: Dict[str, Any] = {"out": config.CSTAR_OUTPUT_DIR, "threads": config.CSTAR_THREADS}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise FileNotFoundError(f"Config file not found: {path}")
        try:
            loaded = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise ConfigurationException(f"{path}: line {e.lineno}: invalid JSON: {e.msg}") from e
        if not isinstance(loaded, dict):
            raise ConfigurationException(f"{path}: config must be a JSON object")
        values.update(loaded)

    for key, value in vars(args).items():
        if key == "config" or value is None:
            continue
        if key == "thresholds":
            merged = dict(values.get("thresholds") or {})
            merged.update(dict(value))
            value = merged
        values[key] = value

    if values.get("seed") is None:
        raise ConfigurationException("--seed is required")
    try:
        run_config = RunConfig.model_validate(values)
    except ValidationError as e:
        raise ConfigurationException(f"Invalid run configuration: {e}") from e

    for field in REQUIRED_PATHS.get(run_config.subcommand, ()):
        if getattr(run_config, field) is None:
            raise ConfigurationException(f"{run_config.subcommand} needs --{field}")
    for field in ("data", "data2", "model"):
        path = getattr(run_config, field)
        if path is not None and not Path(path).exists():
            raise FileNotFoundError(f"{field} file not found: {path}")
    if run_config.subcommand == "measure-opt" and (run_config.model is None) != (run_config.data is None):
        raise ConfigurationException("measure-opt takes both --model and --data, or neither")
    return run_config


def _descriptor(run_config: RunConfig) -> Optional[AlgebraDescriptor]:
    return build_descriptor(run_config.algebra) if run_config.algebra is not None else None


def _load(run_config: RunConfig, path: str, descriptor: Optional[AlgebraDescriptor] = None) -> Dataset:
    dataset = load_dataset(path, run_config.format, descriptor or _descriptor(run_config))
    check_ceiling("samples", dataset.size)
    return dataset


def _finish_report(report: ExperimentReport, run_config: RunConfig) -> bool:
    path = write_report(report, run_config.out)
    logger.info(f"Wrote report {path}")
    return report.passed


def _simple_report(experiment_id: str, run_config: RunConfig, parameters: Dict[str, Any], metrics: Dict[str, float]) -> ExperimentReport:
    report = ExperimentReport(
        experiment_id=experiment_id,
        seed=run_config.seed,
        parameters=parameters,
        metrics=metrics,
        thresholds=[Threshold(metric=metric, op="<=", value=value) for metric, value in run_config.thresholds.items()],
    )
    report.evaluate()
    return report


def _algebra_check(run_config: RunConfig) -> bool:
    descriptor = _descriptor(run_config)
    report = run_algebra_check(
        run_config.seed,
        trials=run_config.trials or 100,
        descriptors=[descriptor] if descriptor is not None else default_descriptors(),
        thresholds=run_config.thresholds,
    )
    return _finish_report(report, run_config)


def _rkhm_fit(run_config: RunConfig) -> bool:
    dataset = _load(run_config, run_config.data)
    report, regressor = run_rkhm_regression(
        dataset,
        run_config.seed,
        ridge=run_config.ridge,
        gamma=run_config.gamma,
        kernel_spec=run_config.kernel,
        test_fraction=run_config.test_fraction,
        interpolation=run_config.interpolation,
        threads=run_config.threads,
        thresholds=run_config.thresholds,
    )
    model_path = write_model(Path(run_config.out) / "rkhm_model.json", regressor.to_payload())
    logger.info(f"Wrote regressor {model_path}")
    return _finish_report(report, run_config)


def _rkhm_predict(run_config: RunConfig) -> bool:
    regressor = RkhmRegressor.from_payload(read_model(run_config.model, RegressorPayload))
    dataset = _load(run_config, run_config.data, regressor.descriptor)
    if dataset.descriptor != regressor.descriptor:
        raise DescriptorMismatchException("Dataset and regressor take values in different algebras")
    predicted = regressor.predict_many(dataset.inputs)
    save_dataset(Dataset(dataset.descriptor, dataset.inputs, predicted[:, None]), Path(run_config.out) / "predictions.json")
    errors = [dataset.descriptor.norm_coords(p - t) for p, t in zip(predicted, dataset.targets[:, 0])]
    report = _simple_report(
        "rkhm_predict",
        run_config,
        {"model": run_config.model, "data": run_config.data},
        {"n": float(dataset.size), "mean_error": float(np.mean(errors)), "max_error": float(np.max(errors))},
    )
    return _finish_report(report, run_config)


def _mmd(run_config: RunConfig) -> bool:
    first = _load(run_config, run_config.data)
    second = _load(run_config, run_config.data2, first.descriptor)
    if first.descriptor != second.descriptor or first.input_dim != second.input_dim:
        raise DatasetException("mmd needs two datasets over the same algebra and input dimension")
    descriptor = first.descriptor
    if run_config.kernel is not None:
        kernel = AKernel.from_spec(run_config.kernel, descriptor)
    else:
        kernel = AKernel.gaussian(descriptor, first.input_dim, run_config.gamma)
    # the first output column of each sample is its A-valued measure weight
    mu = DiscreteAMeasure(descriptor, first.inputs, first.targets[:, 0])
    nu = DiscreteAMeasure(descriptor, second.inputs, second.targets[:, 0])
    value, distance = mmd(kernel, mu, nu)
    metrics = {
        "mmd": distance,
        "mmd_element_norm": value.norm(),
        "mmd_not_positive": float(not is_positive(value)),
    }
    report = _simple_report("mmd", run_config, {"descriptor": descriptor.spec(), "kernel": kernel.spec().model_dump()}, metrics)
    report.thresholds.insert(0, Threshold(metric="mmd_not_positive", op="<=", value=0.0))
    report.evaluate()
    return _finish_report(report, run_config)


def _write_loss_trace(path: Path, losses: Sequence[float]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["step", "loss"])
        for step, loss in enumerate(losses):
            writer.writerow([step, repr(float(loss))])


def _net_train(run_config: RunConfig) -> bool:
    dataset = _load(run_config, run_config.data)
    descriptor = dataset.descriptor
    widths = [dataset.input_dim] + list(run_config.widths) + [dataset.output_dim]
    check_ceiling("depth", len(widths) - 1)
    hidden = build_activation(run_config.activation, run_config.slope)
    activations = [hidden] * (len(widths) - 2) + ["identity"]
    basis_evaluation = None
    if run_config.basis is not None:
        if not isinstance(descriptor, GridFunctionAlgebra):
            raise ConfigurationException("--basis needs a grid_function algebra")
        basis_evaluation = monomial_evaluation(descriptor.points, run_config.basis)
    net = CStarNet.initialize(descriptor, widths, activations, run_config.seed, basis_evaluation=basis_evaluation)

    out = Path(run_config.out)
    write_model(out / "net_init.json", net.to_payload())
    X = lift_inputs(descriptor, dataset.inputs)
    steps = 200 if run_config.steps is None else run_config.steps
    result = train(net, X, dataset.targets, steps, run_config.step_size, run_config.seed)
    write_model(out / "net_model.json", result.net.to_payload())
    _write_loss_trace(out / "loss_trace.csv", result.losses)

    report = _simple_report(
        "net_train",
        run_config,
        {"descriptor": descriptor.spec(), "widths": widths, "activation": run_config.activation,
         "steps": steps, "step_size": run_config.step_size, "basis": run_config.basis},
        {"initial_loss": result.losses[0], "final_loss": result.final_loss, "diverged": float(result.diverged)},
    )
    report.thresholds.insert(0, Threshold(metric="diverged", op="<=", value=0.0))
    report.evaluate()
    return _finish_report(report, run_config)


def _load_net(run_config: RunConfig) -> CStarNet:
    return CStarNet.from_payload(read_model(run_config.model, NetPayload))


def _net_eval(run_config: RunConfig) -> bool:
    net = _load_net(run_config)
    dataset = _load(run_config, run_config.data, net.descriptor)
    if dataset.descriptor != net.descriptor:
        raise DescriptorMismatchException("Dataset and net take values in different algebras")
    if dataset.input_dim != net.widths[0] or dataset.output_dim != net.widths[-1]:
        raise ShapeMismatchException(
            f"net maps A^{net.widths[0]} -> A^{net.widths[-1]}, dataset has {dataset.input_dim} inputs "
            f"and {dataset.output_dim} outputs"
        )
    loss = net.loss(lift_inputs(net.descriptor, dataset.inputs), dataset.targets)
    report = _simple_report("net_eval", run_config, {"model": run_config.model, "data": run_config.data}, {"loss": loss})
    return _finish_report(report, run_config)


def _measure_opt(run_config: RunConfig) -> bool:
    net = dataset = None
    if run_config.model is not None:
        net = _load_net(run_config)
        dataset = _load(run_config, run_config.data)
    steps = 2000 if run_config.steps is None else run_config.steps
    report, weights = run_measure_optimization(
        run_config.seed, steps=steps, net=net, dataset=dataset, thresholds=run_config.thresholds
    )
    write_model(Path(run_config.out) / "measure.json", weights.to_payload())
    return _finish_report(report, run_config)


def _prop_poly(run_config: RunConfig) -> bool:
    report = run_expressiveness(run_config.depth, run_config.basis_size, run_config.seed, thresholds=run_config.thresholds)
    return _finish_report(report, run_config)


def _prop_convex(run_config: RunConfig) -> bool:
    report = run_convexity(run_config.seed, segments=run_config.segments, thresholds=run_config.thresholds)
    return _finish_report(report, run_config)


def _norm_compare(run_config: RunConfig) -> bool:
    report = run_norm_comparison(
        run_config.dimensions, trials=run_config.trials or 1000, seed=run_config.seed, thresholds=run_config.thresholds
    )
    return _finish_report(report, run_config)


def _equivariance(run_config: RunConfig) -> bool:
    report = run_equivariance(
        run_config.seed,
        trials=run_config.trials or 20,
        group=run_config.group,
        order=run_config.group_order,
        thresholds=run_config.thresholds,
    )
    return _finish_report(report, run_config)


HANDLERS: Dict[str, Callable[[RunConfig], bool]] = {
    "algebra-check": _algebra_check,
    "rkhm-fit": _rkhm_fit,
    "rkhm-predict": _rkhm_predict,
    "mmd": _mmd,
    "net-train": _net_train,
    "net-eval": _net_eval,
    "measure-opt": _measure_opt,
    "prop-poly": _prop_poly,
    "prop-convex": _prop_convex,
    "norm-compare": _norm_compare,
    "equivariance": _equivariance,
}

USAGE_ERRORS = (
    ConfigurationException,
    DatasetException,
    FileNotFoundError,
    InvalidDescriptorException,
    InvalidKernelException,
    DescriptorMismatchException,
    ShapeMismatchException,
    ValueError,
)


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one subcommand.

    Args:
        argv: Arguments without the program name (default: sys.argv[1:])

    Returns:
        Exit code: 0 pass, 1 property failure, 2 usage error
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_PASS if e.code in (0, None) else EXIT_USAGE

    configure_logging()
    try:
        config.validate()
        run_config = load_run_config(args)
        passed = HANDLERS[run_config.subcommand](run_config)
    except USAGE_ERRORS as e:
        logger.error(f"{args.subcommand}: {e}")
        return EXIT_USAGE
    except CStarException as e:
        logger.error(f"{args.subcommand} failed: {e}")
        return EXIT_PROPERTY_FAILURE

    if not passed:
        logger.error(f"{args.subcommand}: property thresholds failed")
        return EXIT_PROPERTY_FAILURE
    return EXIT_PASS
