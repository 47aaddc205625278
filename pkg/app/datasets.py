"""Training datasets: real inputs with algebra-valued outputs, stored as CSV or JSON.

CSV layout: an optional first line ``# algebra: {...}`` carrying the
descriptor JSON, a header row, then one row per sample. Input columns are
``x<k>``; output coordinates are ``y<j>_re_<c>`` and ``y<j>_im_<c>`` for
output j and flat coordinate index c.
"""

import csv
import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from app.algebra import AlgebraElement
from app.algebras import ScalarAlgebra, build_descriptor
from app.algebras.base import AlgebraDescriptor
from app.exceptions import CStarException, DatasetException
from app.models import DatasetPayload
from app.serialization import descriptor_to_spec, element_from_payload, element_to_payload, read_model, write_model

logger = logging.getLogger(__name__)

HEADER_PREFIX = "# algebra:"
OUTPUT_COLUMN = re.compile(r"^y(\d+)_(re|im)_(\d+)$")
INPUT_COLUMN = re.compile(r"^x(\d+)$")

PathLike = Union[str, Path]


@dataclass(frozen=True, eq=False)
class Dataset:
    """n samples: inputs (n, p) real and targets (n, d_out, *coord_shape) complex."""

    descriptor: AlgebraDescriptor
    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        inputs = np.array(self.inputs, dtype=float)
        targets = np.array(self.targets, dtype=complex)
        cs = self.descriptor.coord_shape
        if inputs.ndim != 2 or inputs.shape[0] < 1:
            raise DatasetException(f"no samples: inputs must be a non-empty (n, p) array, got {inputs.shape}")
        if targets.ndim != 2 + len(cs) or targets.shape[0] != inputs.shape[0] or targets.shape[2:] != cs:
            raise DatasetException(
                f"targets must have shape ({inputs.shape[0]}, d_out, *{cs}), got {targets.shape}"
            )
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    @property
    def size(self) -> int:
        return int(self.inputs.shape[0])

    @property
    def input_dim(self) -> int:
        return int(self.inputs.shape[1])

    @property
    def output_dim(self) -> int:
        return int(self.targets.shape[1])

    def target_elements(self, j: int = 0) -> List[AlgebraElement]:
        return [AlgebraElement(self.descriptor, t) for t in self.targets[:, j]]

    def subset(self, indices: np.ndarray) -> "Dataset":
        return Dataset(self.descriptor, self.inputs[indices], self.targets[indices])

    def split(self, test_fraction: float, seed: int) -> Tuple["Dataset", Optional["Dataset"]]:
        """Seeded train/test split; the test part is None when it would be empty."""
        order = np.random.default_rng(seed).permutation(self.size)
        n_test = int(round(test_fraction * self.size))
        if n_test == 0 or n_test >= self.size:
            return self, None
        return self.subset(np.sort(order[n_test:])), self.subset(np.sort(order[:n_test]))

    def allclose(self, other: "Dataset", atol: float = 1e-12) -> bool:
        return (
            self.descriptor == other.descriptor
            and self.inputs.shape == other.inputs.shape
            and self.targets.shape == other.targets.shape
            and bool(np.allclose(self.inputs, other.inputs, rtol=0.0, atol=atol))
            and bool(np.allclose(self.targets, other.targets, rtol=0.0, atol=atol))
        )


def _detect_format(path: Path, fmt: Optional[str]) -> str:
    if fmt:
        return fmt
    suffix = path.suffix.lower().lstrip(".")
    if suffix not in ("csv", "json"):
        raise DatasetException(f"{path}: cannot infer dataset format from extension '{path.suffix}'")
    return suffix


def _parse_header(path: Path, number: int, header: List[str]) -> Tuple[List[int], List[Tuple[int, int, int, bool]]]:
    """Map header names to columns; input columns come back ordered by their index k in x<k>."""
    inputs, outputs = [], []
    for column, name in enumerate(header):
        name = name.strip()
        match = INPUT_COLUMN.match(name)
        if match is not None:
            inputs.append((int(match.group(1)), column))
            continue
        match = OUTPUT_COLUMN.match(name)
        if match is None:
            raise DatasetException(f"{path}: line {number}: header has unrecognized column '{name}'")
        outputs.append((column, int(match.group(1)), int(match.group(3)), match.group(2) == "im"))
    if not inputs or not outputs:
        raise DatasetException(
            f"{path}: line {number}: header needs x<k> input and y<j>_re_<c>/y<j>_im_<c> output columns"
        )
    inputs.sort()
    indices = [k for k, _ in inputs]
    if indices != list(range(len(inputs))):
        raise DatasetException(f"{path}: line {number}: input columns must be x0..x{len(inputs) - 1}, got {indices}")
    return [column for _, column in inputs], outputs


def _load_csv(path: Path, descriptor: Optional[AlgebraDescriptor]) -> Dataset:
    lines = path.read_text().splitlines()
    first = 0
    if lines and lines[0].startswith(HEADER_PREFIX):
        try:
            header_descriptor = build_descriptor(json.loads(lines[0][len(HEADER_PREFIX):]))
        except (json.JSONDecodeError, CStarException) as e:
            raise DatasetException(f"{path}: line 1: invalid algebra header: {e}") from e
        if descriptor is not None and descriptor != header_descriptor:
            raise DatasetException(f"{path}: line 1: algebra header differs from the configured algebra")
        descriptor = header_descriptor
        first = 1

    rows = [(number, row) for number, row in enumerate(csv.reader(lines[first:]), start=first + 1) if row]
    if len(rows) < 2:
        raise DatasetException(f"{path}: no samples")
    header_number, header = rows[0]
    input_columns, output_columns = _parse_header(path, header_number, header)

    d_out = max(j for _, j, _, _ in output_columns) + 1
    coord_size = max(c for _, _, c, _ in output_columns) + 1
    if descriptor is None:
        if coord_size != 1:
            raise DatasetException(f"{path}: no '# algebra:' header and outputs have {coord_size} coordinates")
        descriptor = ScalarAlgebra()
    if coord_size != descriptor.coord_size:
        raise DatasetException(
            f"{path}: outputs have {coord_size} coordinates but {descriptor.kind} elements have {descriptor.coord_size}"
        )

    inputs = np.zeros((len(rows) - 1, len(input_columns)))
    targets = np.zeros((len(rows) - 1, d_out, coord_size), dtype=complex)
    for sample, (number, row) in enumerate(rows[1:]):
        if len(row) != len(header):
            raise DatasetException(f"{path}: line {number}: expected {len(header)} fields, got {len(row)}")
        try:
            inputs[sample] = [float(row[c]) for c in input_columns]
            for column, j, c, imaginary in output_columns:
                targets[sample, j, c] += (1j if imaginary else 1.0) * float(row[column])
        except ValueError as e:
            raise DatasetException(f"{path}: line {number}: {e}") from e
    return Dataset(descriptor, inputs, targets.reshape((len(rows) - 1, d_out) + descriptor.coord_shape))


def _load_json(path: Path, descriptor: Optional[AlgebraDescriptor]) -> Dataset:
    if not path.read_text().strip():
        raise DatasetException(f"{path}: no samples")
    payload = read_model(path, DatasetPayload)
    if not payload.inputs:
        raise DatasetException(f"{path}: no samples")
    try:
        header_descriptor = build_descriptor(payload.descriptor)
    except CStarException as e:
        raise DatasetException(f"{path}: invalid algebra descriptor: {e}") from e
    if descriptor is not None and descriptor != header_descriptor:
        raise DatasetException(f"{path}: algebra descriptor differs from the configured algebra")
    if len(payload.outputs) != len(payload.inputs):
        raise DatasetException(f"{path}: {len(payload.inputs)} inputs but {len(payload.outputs)} outputs")
    try:
        targets = np.array([
            [element_from_payload(element, header_descriptor).coords for element in sample]
            for sample in payload.outputs
        ])
    except CStarException as e:
        raise DatasetException(f"{path}: invalid output element: {e}") from e
    return Dataset(header_descriptor, np.array(payload.inputs, dtype=float), targets)


def load_dataset(path: PathLike, fmt: Optional[str] = None, descriptor: Optional[AlgebraDescriptor] = None) -> Dataset:
    """
    Load and validate a dataset.

    Args:
        path: CSV or JSON file
        fmt: "csv" or "json" (default: from the extension)
        descriptor: Algebra to use when the file carries no header (CSV)

    Returns:
        Validated Dataset

    Raises:
        FileNotFoundError: If the file does not exist
        DatasetException: If the file is empty or malformed (with line numbers for CSV)
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Dataset not found: {path}")
    fmt = _detect_format(path, fmt)
    dataset = _load_csv(path, descriptor) if fmt == "csv" else _load_json(path, descriptor)
    logger.info(f"Loaded {dataset.size} samples from {path} ({dataset.descriptor.kind})")
    return dataset


def save_dataset(dataset: Dataset, path: PathLike, fmt: Optional[str] = None) -> Path:
    """Write a dataset as CSV (with descriptor header line) or JSON."""
    path = Path(path)
    fmt = _detect_format(path, fmt)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        return write_model(path, DatasetPayload(
            descriptor=descriptor_to_spec(dataset.descriptor),
            inputs=dataset.inputs.tolist(),
            outputs=[
                [element_to_payload(AlgebraElement(dataset.descriptor, t)) for t in sample]
                for sample in dataset.targets
            ],
        ))

    flat = dataset.targets.reshape(dataset.size, dataset.output_dim, -1)
    header = [f"x{k}" for k in range(dataset.input_dim)]
    for j in range(dataset.output_dim):
        for c in range(flat.shape[2]):
            header.extend([f"y{j}_re_{c}", f"y{j}_im_{c}"])
    with path.open("w", newline="") as handle:
        handle.write(f"{HEADER_PREFIX} {json.dumps(dataset.descriptor.spec())}\n")
        writer = csv.writer(handle)
        writer.writerow(header)
        for x, y in zip(dataset.inputs, flat):
            row = [repr(float(v)) for v in x]
            for j in range(dataset.output_dim):
                for value in y[j]:
                    row.extend([repr(float(value.real)), repr(float(value.imag))])
            writer.writerow(row)
    return path
