"""Property-experiment drivers.

Every driver is deterministic in its seed and returns an ExperimentReport
whose pass/fail follows from its metrics and thresholds. Wall-clock time is
recorded on the report but excluded from the written content.
"""

import csv
import logging
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.algebra import (
    AlgebraElement,
    absolute,
    hilbert_schmidt_norm,
    is_positive,
    mul,
    norm,
    operator_norm,
    star,
)
from app.algebras import (
    BlockDiagonalAlgebra,
    CirculantAlgebra,
    DenseMatrixAlgebra,
    GridFunctionAlgebra,
    NAMED_GROUPS,
    ScalarAlgebra,
)
from app.algebras.base import AlgebraDescriptor
from app.config import config
from app.datasets import Dataset
from app.exceptions import ConfigurationException, DatasetException, PropertyViolationException
from app.hilbert_module import ModuleVector, abs_vec, inner, right_mul
from app.kernels import AKernel, gram
from app.models import ExperimentReport, KernelSpec, Threshold
from app.net import (
    CStarLayer,
    CStarNet,
    ProbabilityWeights,
    average,
    build_group_net,
    build_polynomial_net,
    convexity_violation,
    equivariance_check,
    fit_residuals,
    forward_at,
    identity_group_net,
    lift_inputs,
    measure_objective,
    optimize_measure,
    poly_degree_check,
    polynomial_expansion,
    slice_outputs,
    symbolic_coefficients,
)
from app.rkhm import RkhmRegressor, fit_krr

logger = logging.getLogger(__name__)

# relative rounding slack for the exact inequality chain ||a||_op <= ||a||_HS <= sqrt(d) ||a||_op
NORM_SLACK = 1e-12
MAX_BASIS_SIZE = 4


def check_ceiling(name: str, value: int, limit: Optional[int] = None) -> None:
    """Raise when ``value`` exceeds ``limit`` (default: the configured ceiling called ``name``)."""
    if limit is None:
        limit = config.get_ceilings()[name]
    if value > limit:
        raise ConfigurationException(f"{name}={value} exceeds the ceiling {limit}")


def _finish(report: ExperimentReport, started: float, overrides: Optional[Dict[str, float]]) -> ExperimentReport:
    for metric, value in (overrides or {}).items():
        for threshold in report.thresholds:
            if threshold.metric == metric:
                threshold.value = float(value)
                break
        else:
            report.thresholds.append(Threshold(metric=metric, op="<=", value=float(value)))
    report.wall_clock_seconds = time.perf_counter() - started
    report.evaluate()
    logger.info(
        f"Experiment {report.experiment_id} (seed={report.seed}): "
        f"{'PASS' if report.passed else 'FAIL'} in {report.wall_clock_seconds:.2f}s"
    )
    return report


def write_report(report: ExperimentReport, out_dir: Union[str, Path]) -> Path:
    """Write ``<id>.json`` and the ``<id>_summary.csv`` metric table; return the JSON path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{report.experiment_id}.json"
    path.write_text(report.content_json() + "\n")
    limits = {threshold.metric: threshold for threshold in report.thresholds}
    with (out_dir / f"{report.experiment_id}_summary.csv").open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["experiment", "metric", "value", "op", "threshold", "holds"])
        for metric, value in report.metrics.items():
            limit = limits.get(metric)
            writer.writerow([
                report.experiment_id,
                metric,
                repr(value),
                limit.op if limit else "",
                repr(limit.value) if limit else "",
                limit.holds(report.metrics) if limit else "",
            ])
    return path


def run_norm_comparison(
    dimensions: Sequence[int] = (2, 4, 8, 16),
    trials: int = 1000,
    seed: int = 0,
    thresholds: Optional[Dict[str, float]] = None,
) -> ExperimentReport:
    """Check ||a||_op <= ||a||_HS <= sqrt(d) ||a||_op on random complex d x d matrices."""
    started = time.perf_counter()
    for d in dimensions:
        if d < 1:
            raise ConfigurationException(f"dimension must be >= 1, got {d}")
        check_ceiling("dimension", d)
    rng = np.random.default_rng(seed)
    metrics: Dict[str, float] = {}
    violations = 0
    for d in dimensions:
        descriptor = DenseMatrixAlgebra(d)
        ratios = []
        for _ in range(trials):
            a = AlgebraElement.random(descriptor, rng)
            op, hs = operator_norm(a), hilbert_schmidt_norm(a)
            if op > hs * (1 + NORM_SLACK) or hs > np.sqrt(d) * op * (1 + NORM_SLACK):
                violations += 1
            ratios.append(hs / op)
        metrics[f"mean_ratio_d{d}"] = float(np.mean(ratios))
        metrics[f"max_ratio_over_sqrt_d{d}"] = float(np.max(ratios) / np.sqrt(d))
    metrics["violations"] = float(violations)
    report = ExperimentReport(
        experiment_id="norm_comparison",
        seed=seed,
        parameters={"dimensions": list(dimensions), "trials": trials},
        metrics=metrics,
        thresholds=[Threshold(metric="violations", op="<=", value=0)],
    )
    return _finish(report, started, thresholds)


def run_expressiveness(
    depth: int,
    basis_size: int,
    seed: int,
    thresholds: Optional[Dict[str, float]] = None,
) -> ExperimentReport:
    """Detected polynomial degree in the basis values for L = 1..depth, plus the L = 2 expansion check."""
    started = time.perf_counter()
    if depth < 1 or basis_size < 1:
        raise ConfigurationException(f"depth and basis size must be >= 1, got L={depth} m={basis_size}")
    check_ceiling("depth", depth)
    check_ceiling("basis_size", basis_size, MAX_BASIS_SIZE)

    metrics: Dict[str, float] = {}
    mismatches = 0
    accept, reject = [], []
    for L in range(1, depth + 1):
        net, x = build_polynomial_net(L, basis_size, seed + L)
        residuals = fit_residuals(net, x, L)
        try:
            degree = poly_degree_check(net, x)
        except PropertyViolationException as e:
            logger.warning(str(e))
            degree = -1
        mismatches += int(degree != L)
        accept.append(residuals[L])
        reject.append(residuals[L - 1])
        metrics[f"degree_L{L}"] = float(degree)
        metrics[f"residual_L{L}_at_degree_L"] = residuals[L]
        metrics[f"residual_L{L}_at_degree_L_minus_1"] = residuals[L - 1]

    net, x = build_polynomial_net(2, basis_size, seed)
    expansion = polynomial_expansion(net, x)
    symbolic = symbolic_coefficients(net, x)
    zero = np.zeros(net.widths[-1], dtype=complex)
    metrics["expansion_max_difference"] = max(
        float(np.max(np.abs(expansion.get(key, zero) - symbolic.get(key, zero))))
        for key in set(expansion) | set(symbolic)
    )
    metrics["degree_mismatches"] = float(mismatches)
    metrics["max_residual_at_degree_L"] = float(max(accept))
    metrics["min_residual_below_degree_L"] = float(min(reject))

    report = ExperimentReport(
        experiment_id="expressiveness",
        seed=seed,
        parameters={"depth": depth, "basis_size": basis_size},
        metrics=metrics,
        thresholds=[
            Threshold(metric="degree_mismatches", op="<=", value=0),
            Threshold(metric="max_residual_at_degree_L", op="<=", value=1e-8),
            Threshold(metric="min_residual_below_degree_L", op=">", value=1e-3),
            Threshold(metric="expansion_max_difference", op="<=", value=1e-10),
        ],
    )
    return _finish(report, started, thresholds)


def run_convexity(
    seed: int,
    segments: int = 200,
    grid_size: int = 8,
    thresholds: Optional[Dict[str, float]] = None,
) -> ExperimentReport:
    """Chord violations of P -> L(A_P f(x), y) on sampled segments, the Dirac identity and one mirror-descent run."""
    started = time.perf_counter()
    check_ceiling("grid", grid_size)
    rng = np.random.default_rng(seed)
    descriptor = GridFunctionAlgebra.uniform(grid_size, -1.0, 1.0)
    net = CStarNet.initialize(descriptor, [2, 3, 2], "tanh", seed)
    X = lift_inputs(descriptor, rng.standard_normal((10, 2)))
    Y = rng.standard_normal((10, 2)) + 1j * rng.standard_normal((10, 2))
    F = slice_outputs(net, X)

    ts = np.linspace(0.0, 1.0, 11)
    worst = max(
        convexity_violation(F, Y, rng.dirichlet(np.ones(grid_size)), rng.dirichlet(np.ones(grid_size)), ts)
        for _ in range(segments)
    )

    x0 = ModuleVector(descriptor, X[0])
    dirac_error = max(
        float(np.max(np.abs(average(net, x0, ProbabilityWeights.dirac(z)) - forward_at(net, x0, z))))
        for z in range(grid_size)
    )

    result = optimize_measure(net, X, Y, ProbabilityWeights.uniform(range(grid_size)), steps=200)
    report = ExperimentReport(
        experiment_id="convexity",
        seed=seed,
        parameters={"segments": segments, "grid_size": grid_size, "t_grid": len(ts)},
        metrics={
            "max_violation": float(worst),
            "dirac_error": dirac_error,
            "initial_objective": result.initial_objective,
            "optimized_objective": result.objective,
            "objective_increase": result.objective - result.initial_objective,
            "simplex_error": float(abs(result.weights.weights.sum() - 1.0)),
        },
        thresholds=[
            Threshold(metric="max_violation", op="<=", value=1e-10),
            Threshold(metric="dirac_error", op="<=", value=1e-12),
            Threshold(metric="objective_increase", op="<=", value=0.0),
            Threshold(metric="simplex_error", op="<=", value=1e-12),
        ],
    )
    return _finish(report, started, thresholds)


def _mean_element_error(descriptor: AlgebraDescriptor, predicted: np.ndarray, targets: np.ndarray) -> float:
    return float(np.mean([descriptor.norm_coords(p - t) for p, t in zip(predicted, targets)]))


def run_rkhm_regression(
    dataset: Dataset,
    seed: int,
    ridge: float = 1e-3,
    gamma: float = 1.0,
    kernel_spec: Optional[KernelSpec] = None,
    test_fraction: float = 0.25,
    interpolation: bool = False,
    threads: Optional[int] = None,
    thresholds: Optional[Dict[str, float]] = None,
) -> Tuple[ExperimentReport, RkhmRegressor]:
    """
    Fit RKHM ridge regression on a seeded train split and report A-norm errors.

    Returns:
        (report, fitted regressor)
    """
    started = time.perf_counter()
    check_ceiling("samples", dataset.size)
    if dataset.output_dim != 1:
        raise DatasetException(f"RKHM regression needs one algebra-valued output, dataset has {dataset.output_dim}")
    descriptor = dataset.descriptor
    if kernel_spec is not None:
        kernel = AKernel.from_spec(kernel_spec, descriptor)
    else:
        kernel = AKernel.gaussian(descriptor, dataset.input_dim, gamma)

    train_set, test_set = dataset.split(test_fraction, seed)
    targets = train_set.targets[:, 0]
    regressor = fit_krr(kernel, train_set.inputs, targets, ridge, interpolation=interpolation, threads=threads)
    min_eigenvalue = gram(kernel, train_set.inputs, threads=threads).min_eigenvalue()

    metrics = {
        "n_train": float(train_set.size),
        "n_test": float(test_set.size if test_set is not None else 0),
        "train_error": _mean_element_error(descriptor, regressor.predict_many(train_set.inputs), targets),
        "gram_min_eigenvalue": min_eigenvalue,
        "gram_singular": float(min_eigenvalue <= 1e-10),
        "system_residual": regressor.system_residual(targets) / max(1.0, float(np.max(np.abs(targets)))),
    }
    if test_set is not None:
        metrics["test_error"] = _mean_element_error(
            descriptor, regressor.predict_many(test_set.inputs), test_set.targets[:, 0]
        )
    report = ExperimentReport(
        experiment_id="rkhm_regression",
        seed=seed,
        parameters={
            "descriptor": descriptor.spec(),
            "kernel": kernel.spec().model_dump(),
            "ridge": ridge,
            "test_fraction": test_fraction,
            "interpolation": interpolation,
        },
        metrics=metrics,
        thresholds=[Threshold(metric="system_residual", op="<=", value=1e-8)],
    )
    return _finish(report, started, thresholds), regressor


def default_descriptors() -> List[AlgebraDescriptor]:
    """One small descriptor of every kind."""
    return [
        ScalarAlgebra(),
        DenseMatrixAlgebra(3),
        CirculantAlgebra(4),
        BlockDiagonalAlgebra([1, 2]),
        GridFunctionAlgebra.uniform(5),
        NAMED_GROUPS["symmetric"](3),
    ]


def run_algebra_check(
    seed: int,
    trials: int = 100,
    descriptors: Optional[Sequence[AlgebraDescriptor]] = None,
    thresholds: Optional[Dict[str, float]] = None,
) -> ExperimentReport:
    """C*-identity, submultiplicativity, involution, absolute value and Hilbert-module axioms on random elements."""
    started = time.perf_counter()
    descriptors = list(descriptors) if descriptors else default_descriptors()
    rng = np.random.default_rng(seed)
    worst = {
        "cstar_defect": 0.0,
        "submultiplicativity_violation": 0.0,
        "involution_error": 0.0,
        "star_product_error": 0.0,
        "abs_error": 0.0,
        "positivity_failures": 0.0,
        "module_symmetry_error": 0.0,
        "module_linearity_error": 0.0,
        "module_abs_error": 0.0,
        "module_positivity_failures": 0.0,
    }

    def record(name: str, value: float) -> None:
        worst[name] = max(worst[name], float(value))

    for descriptor in descriptors:
        for _ in range(trials):
            a = AlgebraElement.random(descriptor, rng)
            b = AlgebraElement.random(descriptor, rng)
            na, nb = norm(a), norm(b)
            gram_a = mul(star(a), a)
            record("cstar_defect", abs(norm(gram_a) - na ** 2) / max(1.0, na ** 2))
            record("submultiplicativity_violation", (norm(mul(a, b)) - na * nb) / max(1.0, na * nb))
            record("involution_error", np.max(np.abs(star(star(a)).coords - a.coords)))
            record("star_product_error", np.max(np.abs(star(mul(a, b)).coords - mul(star(b), star(a)).coords)) / max(1.0, na * nb))
            modulus = absolute(a)
            record("abs_error", np.max(np.abs(mul(modulus, modulus).coords - gram_a.coords)) / max(1.0, na ** 2))
            record("positivity_failures", worst["positivity_failures"] + (not is_positive(gram_a)))

            shape = (3,) + descriptor.coord_shape
            u, v, w = (
                ModuleVector(descriptor, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
                for _ in range(3)
            )
            uv, vu = inner(u, v), inner(v, u)
            scale = max(1.0, norm(uv))
            record("module_symmetry_error", np.max(np.abs(vu.coords - star(uv).coords)) / scale)
            lhs = inner(u, right_mul(v, a) + right_mul(w, b))
            rhs = mul(uv, a) + mul(inner(u, w), b)
            record("module_linearity_error", np.max(np.abs(lhs.coords - rhs.coords)) / max(1.0, norm(rhs)))
            uu = inner(u, u)
            modulus_u = abs_vec(u)
            record("module_abs_error", np.max(np.abs(mul(modulus_u, modulus_u).coords - uu.coords)) / max(1.0, norm(uu)))
            record("module_positivity_failures", worst["module_positivity_failures"] + (not is_positive(uu)))

    limits = {
        "cstar_defect": 1e-10,
        "submultiplicativity_violation": 1e-10,
        "involution_error": 1e-12,
        "star_product_error": 1e-12,
        "abs_error": 1e-10,
        "positivity_failures": 0,
        "module_symmetry_error": 1e-12,
        "module_linearity_error": 1e-12,
        "module_abs_error": 1e-10,
        "module_positivity_failures": 0,
    }
    report = ExperimentReport(
        experiment_id="algebra_check",
        seed=seed,
        parameters={"trials": trials, "descriptors": [d.spec() for d in descriptors]},
        metrics=worst,
        thresholds=[Threshold(metric=metric, op="<=", value=value) for metric, value in limits.items()],
    )
    return _finish(report, started, thresholds)


def run_equivariance(
    seed: int,
    trials: int = 20,
    group: str = "symmetric",
    order: int = 3,
    thresholds: Optional[Dict[str, float]] = None,
) -> ExperimentReport:
    """Exhaustive right-translation equivariance on Z/4, S_3 and the configured group, with a power check."""
    started = time.perf_counter()
    cases = [("cyclic", 4), ("symmetric", 3)]
    if (group, order) not in cases:
        cases.append((group, order))

    metrics: Dict[str, float] = {}
    limits: List[Threshold] = []
    for family, n in cases:
        descriptor = NAMED_GROUPS[family](n)
        check_ceiling("group order", descriptor.order, config.CSTAR_GROUP_CHECK_LIMIT)
        label = f"{family}{n}"
        relu_net = build_group_net(descriptor, [2, 2], "relu", seed)
        tanh_net = build_group_net(descriptor, [2, 3, 2], "tanh", seed + 1)
        metrics[f"error_{label}"] = max(
            equivariance_check(relu_net, trials, seed),
            equivariance_check(tanh_net, trials, seed),
        )
        metrics[f"identity_error_{label}"] = equivariance_check(identity_group_net(descriptor, 2), trials, seed)
        limits.append(Threshold(metric=f"error_{label}", op="<=", value=1e-10))
        limits.append(Threshold(metric=f"identity_error_{label}", op="<=", value=0.0))
        if not descriptor.is_commutative:
            adversarial = build_group_net(descriptor, [2, 2], "relu", seed, multiply="right")
            metrics[f"adversarial_error_{label}"] = equivariance_check(adversarial, trials, seed)
            limits.append(Threshold(metric=f"adversarial_error_{label}", op=">", value=1e-2))

    report = ExperimentReport(
        experiment_id="equivariance",
        seed=seed,
        parameters={"trials": trials, "groups": [f"{family}{n}" for family, n in cases]},
        metrics=metrics,
        thresholds=limits,
    )
    return _finish(report, started, thresholds)


PLANTED_MEASURE = (0.2, 0.5, 0.3)


def planted_measure_problem(seed: int, samples: int = 6) -> Tuple[CStarNet, np.ndarray, np.ndarray, ProbabilityWeights]:
    """Net with slices W(z) in {I, swap, diag(1, -1)} and targets generated by A_Q f for a planted Q."""
    descriptor = GridFunctionAlgebra.uniform(3)
    weights = np.stack([np.eye(2), np.array([[0.0, 1.0], [1.0, 0.0]]), np.diag([1.0, -1.0])], axis=-1)
    net = CStarNet(descriptor, [CStarLayer(weights, np.zeros((2, 3)), "identity")])
    rng = np.random.default_rng(seed)
    X = lift_inputs(descriptor, rng.standard_normal((samples, 2)))
    planted = ProbabilityWeights(np.arange(3), np.array(PLANTED_MEASURE))
    Y = slice_outputs(net, X) @ planted.weights
    return net, X, Y, planted


def run_measure_optimization(
    seed: int,
    steps: int = 2000,
    net: Optional[CStarNet] = None,
    dataset: Optional[Dataset] = None,
    thresholds: Optional[Dict[str, float]] = None,
) -> Tuple[ExperimentReport, ProbabilityWeights]:
    """
    Mirror descent over P from the uniform measure.

    Without ``net``/``dataset`` the planted problem is used and the optimum is
    compared against the planted objective; otherwise the dataset targets
    (scalar outputs, one per net output) are fitted by A_P f.

    Returns:
        (report, optimized measure)
    """
    started = time.perf_counter()
    metrics: Dict[str, float] = {}
    limits = [Threshold(metric="simplex_error", op="<=", value=1e-12)]
    if net is None:
        net, X, Y, planted = planted_measure_problem(seed)
        metrics["planted_objective"] = measure_objective(slice_outputs(net, X), Y, planted.weights)
    else:
        if dataset is None:
            raise ConfigurationException("measure optimization on a model needs a dataset")
        if not isinstance(dataset.descriptor, ScalarAlgebra) or dataset.output_dim != net.widths[-1]:
            raise DatasetException(
                f"measure optimization needs scalar targets with {net.widths[-1]} outputs per sample"
            )
        check_ceiling("samples", dataset.size)
        X = lift_inputs(net.descriptor, dataset.inputs)
        Y = dataset.targets
        planted = None

    grid = net.descriptor.coord_shape[0]
    result = optimize_measure(net, X, Y, ProbabilityWeights.uniform(range(grid)), steps)
    metrics["initial_objective"] = result.initial_objective
    metrics["optimized_objective"] = result.objective
    metrics["objective_increase"] = result.objective - result.initial_objective
    metrics["simplex_error"] = float(abs(result.weights.weights.sum() - 1.0))
    metrics["min_weight"] = float(result.weights.weights.min())
    limits.append(Threshold(metric="objective_increase", op="<=", value=0.0))
    limits.append(Threshold(metric="min_weight", op=">=", value=0.0))
    if planted is not None:
        metrics["objective_gap"] = result.objective - metrics["planted_objective"]
        metrics["weight_error"] = float(np.max(np.abs(result.weights.dense(grid) - planted.dense(grid))))
        limits.append(Threshold(metric="objective_gap", op="<=", value=1e-6))

    report = ExperimentReport(
        experiment_id="measure_optimization",
        seed=seed,
        parameters={"steps": steps, "grid_size": grid, "planted": planted is not None},
        metrics=metrics,
        thresholds=limits,
    )
    return _finish(report, started, thresholds), result.weights
