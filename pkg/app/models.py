"""Pydantic models for JSON payloads, reports and run configuration."""

from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field


class AlgebraSpec(BaseModel):
    """Algebra descriptor header."""
    kind: Literal["scalar", "dense_matrix", "circulant", "block_diagonal", "grid_function", "group_algebra"] = Field(
        ..., description="Algebra kind"
    )
    size: Optional[int] = Field(default=None, description="Matrix/circulant dimension d, or uniform grid size")
    blocks: Optional[List[int]] = Field(default=None, description="Block sizes for block_diagonal")
    points: Optional[List[List[float]]] = Field(default=None, description="Grid points of Z, one row per point")
    weights: Optional[List[float]] = Field(default=None, description="Quadrature weights (positive, sum to 1)")
    order: Optional[int] = Field(default=None, description="Group order |G|")
    table: Optional[List[int]] = Field(default=None, description="Row-major group multiplication table")
    group: Optional[Literal["cyclic", "symmetric", "dihedral"]] = Field(
        default=None, description="Named group family (alternative to an explicit table)"
    )
    name: Optional[str] = Field(default=None, description="Human-readable group name")


class ComplexArrayPayload(BaseModel):
    """Complex array split into real and imaginary parts (row-major)."""
    shape: List[int] = Field(..., description="Array shape")
    re: List[float] = Field(..., description="Real parts, row-major")
    im: List[float] = Field(..., description="Imaginary parts, row-major")


class ElementPayload(ComplexArrayPayload):
    """One algebra element."""
    kind: str = Field(..., description="Algebra kind of the element")


class ModuleVectorPayload(BaseModel):
    """An element of A^d."""
    descriptor: AlgebraSpec = Field(..., description="Algebra descriptor header")
    entries: List[ElementPayload] = Field(..., description="The d entries", min_length=1)


class KernelTermSpec(BaseModel):
    """One term a_r * kappa_r(x, y) of an A-valued kernel."""
    base: Literal["gaussian", "linear"] = Field(default="gaussian", description="Scalar base kernel")
    gamma: float = Field(default=1.0, description="Gaussian bandwidth: exp(-gamma |x - y|^2)", gt=0)
    coefficient: Optional[ElementPayload] = Field(
        default=None, description="Positive coefficient a_r (defaults to 1_A)"
    )


class KernelSpec(BaseModel):
    """A-valued kernel k(x, y) = sum_r a_r kappa_r(x, y)."""
    input_dim: int = Field(..., description="Input space dimension", ge=1)
    terms: List[KernelTermSpec] = Field(..., description="Kernel terms", min_length=1)


class RegressorPayload(BaseModel):
    """A fitted RKHM ridge regressor."""
    descriptor: AlgebraSpec = Field(..., description="Algebra descriptor header")
    kernel: KernelSpec = Field(..., description="Kernel specification")
    points: List[List[float]] = Field(..., description="Training inputs")
    coefficients: List[ElementPayload] = Field(..., description="One A-valued coefficient per training input")
    ridge: float = Field(..., description="Ridge parameter lambda", ge=0)
    interpolation: bool = Field(default=False, description="Whether lambda = 0 interpolation was used")


class DatasetPayload(BaseModel):
    """Training data with explicit algebra-valued outputs."""
    descriptor: AlgebraSpec = Field(..., description="Algebra descriptor header")
    inputs: List[List[float]] = Field(..., description="Real input features, one row per sample")
    outputs: List[List[ElementPayload]] = Field(..., description="Per sample, the d_out output elements")


class ActivationSpec(BaseModel):
    """Coordinatewise activation."""
    name: Literal["identity", "linear", "relu", "tanh"] = Field(..., description="Activation name")
    slope: float = Field(default=1.0, description="Slope s of the linear activation s*t")


class LayerPayload(BaseModel):
    """One C*-algebra net layer."""
    activation: ActivationSpec = Field(..., description="Activation")
    multiply: Literal["left", "right"] = Field(default="left", description="Weights act by left or right multiplication")
    weights: Optional[ComplexArrayPayload] = Field(default=None, description="(d_j, d_{j-1}, *coord_shape) weights")
    bias: Optional[ComplexArrayPayload] = Field(default=None, description="(d_j, *coord_shape) bias")


class BasisPayload(BaseModel):
    """Basis-coefficient parameterization of grid-function weights."""
    evaluation: ComplexArrayPayload = Field(..., description="(grid, m) matrix of v_l evaluated on the grid")
    coefficients: List[ComplexArrayPayload] = Field(..., description="Per layer (m, d_j, d_{j-1}) coefficients")
    biases: List[ComplexArrayPayload] = Field(..., description="Per layer (d_j,) constant biases")


class NetPayload(BaseModel):
    """A C*-algebra net model file."""
    descriptor: AlgebraSpec = Field(..., description="Algebra descriptor header")
    layers: List[LayerPayload] = Field(..., description="Layers, input to output", min_length=1)
    basis: Optional[BasisPayload] = Field(default=None, description="Basis coefficients, if basis-parameterized")


class ProbabilityWeightsPayload(BaseModel):
    """A discrete probability measure on grid indices."""
    support: List[int] = Field(..., description="Grid indices of the support points")
    weights: List[float] = Field(..., description="Simplex weights")


class Threshold(BaseModel):
    """Pass criterion for one metric."""
    metric: str = Field(..., description="Metric name")
    op: Literal["<=", ">=", "<", ">"] = Field(default="<=", description="Comparison operator")
    value: float = Field(..., description="Threshold value")

    def holds(self, metrics: Dict[str, float]) -> bool:
        observed = metrics.get(self.metric)
        if observed is None:
            return False
        if self.op == "<=":
            return observed <= self.value
        if self.op == ">=":
            return observed >= self.value
        if self.op == "<":
            return observed < self.value
        return observed > self.value


class ExperimentReport(BaseModel):
    """Machine-readable result of one property experiment."""
    experiment_id: str = Field(..., description="Experiment identifier")
    seed: int = Field(..., description="Seed the run is deterministic in")
    parameters: Dict[str, Any] = Field(default_factory=dict, description="Experiment parameters")
    metrics: Dict[str, float] = Field(default_factory=dict, description="Named real metrics")
    thresholds: List[Threshold] = Field(default_factory=list, description="Pass criteria")
    passed: bool = Field(default=False, description="All thresholds hold")
    wall_clock_seconds: Optional[float] = Field(default=None, description="Run time (excluded from hashed content)")

    def evaluate(self) -> bool:
        """Recompute ``passed`` from metrics and thresholds."""
        self.passed = all(threshold.holds(self.metrics) for threshold in self.thresholds)
        return self.passed

    def content_json(self) -> str:
        """Deterministic JSON without timing information."""
        return self.model_dump_json(indent=2, exclude={"wall_clock_seconds"})


class RunConfig(BaseModel):
    """Merged CLI configuration (flags override the JSON config file)."""
    subcommand: str = Field(..., description="Subcommand to run")
    seed: int = Field(..., description="Mandatory seed")
    out: str = Field(default="artifacts", description="Output directory")
    threads: int = Field(default=1, description="Worker threads for data-parallel loops", ge=1)
    algebra: Optional[AlgebraSpec] = Field(default=None, description="Algebra descriptor (else from dataset header)")
    kernel: Optional[KernelSpec] = Field(default=None, description="Kernel specification")
    data: Optional[str] = Field(default=None, description="Dataset path")
    data2: Optional[str] = Field(default=None, description="Second dataset path (mmd)")
    model: Optional[str] = Field(default=None, description="Model file path")
    format: Optional[Literal["csv", "json"]] = Field(default=None, description="Dataset format (else by extension)")
    gamma: float = Field(default=1.0, description="Gaussian kernel bandwidth", gt=0)
    ridge: float = Field(default=1e-3, description="Ridge parameter", ge=0)
    interpolation: bool = Field(default=False, description="Allow ridge = 0 with pseudo-inverse fallback")
    test_fraction: float = Field(default=0.25, description="Held-out fraction", ge=0, lt=1)
    widths: List[int] = Field(default_factory=lambda: [4], description="Hidden layer widths")
    basis: Optional[int] = Field(default=None, description="Monomial basis size for grid-algebra nets (net-train)", ge=1)
    activation: Literal["identity", "linear", "relu", "tanh"] = Field(default="tanh", description="Hidden activation")
    slope: float = Field(default=1.0, description="Linear activation slope")
    steps: Optional[int] = Field(default=None, description="Optimization steps (net-train 200, measure-opt 2000)", ge=0)
    step_size: float = Field(default=0.05, description="Gradient step size", gt=0)
    trials: Optional[int] = Field(default=None, description="Random trials per property (subcommand default if unset)", ge=1)
    dimensions: List[int] = Field(default_factory=lambda: [2, 4, 8, 16], description="Matrix sizes for norm-compare")
    depth: int = Field(default=3, description="Network depth L for prop-poly", ge=1)
    basis_size: int = Field(default=2, description="Number of basis functions m for prop-poly", ge=1)
    segments: int = Field(default=200, description="Sampled segments for prop-convex", ge=1)
    group: Literal["cyclic", "symmetric", "dihedral"] = Field(default="symmetric", description="Group family")
    group_order: int = Field(default=3, description="Group parameter (n of Z/n, S_n, D_n)", ge=1)
    thresholds: Dict[str, float] = Field(default_factory=dict, description="Threshold overrides by metric name")
