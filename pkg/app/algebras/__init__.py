"""Concrete C*-algebra descriptors and the kind registry."""

import logging
from typing import Any, Dict, Mapping

import numpy as np

from app.algebras.base import AlgebraDescriptor
from app.algebras.block_diagonal import BlockDiagonalAlgebra
from app.algebras.circulant import CirculantAlgebra
from app.algebras.dense_matrix import DenseMatrixAlgebra
from app.algebras.grid_function import GridFunctionAlgebra
from app.algebras.group_algebra import GroupAlgebra, cyclic_group, dihedral_group, symmetric_group
from app.algebras.scalar import ScalarAlgebra
from app.exceptions import InvalidDescriptorException

__all__ = [
    "AlgebraDescriptor",
    "ScalarAlgebra",
    "DenseMatrixAlgebra",
    "CirculantAlgebra",
    "BlockDiagonalAlgebra",
    "GridFunctionAlgebra",
    "GroupAlgebra",
    "ALGEBRA_KINDS",
    "build_descriptor",
    "cyclic_group",
    "dihedral_group",
    "symmetric_group",
]

logger = logging.getLogger(__name__)

ALGEBRA_KINDS = (
    "scalar",
    "dense_matrix",
    "circulant",
    "block_diagonal",
    "grid_function",
    "group_algebra",
)

NAMED_GROUPS = {
    "cyclic": cyclic_group,
    "symmetric": symmetric_group,
    "dihedral": dihedral_group,
}


def _require(spec: Mapping[str, Any], field: str) -> Any:
    value = spec.get(field)
    if value is None:
        raise InvalidDescriptorException(f"Algebra kind '{spec.get('kind')}' requires field '{field}'")
    return value


def _build_group(spec: Mapping[str, Any]) -> GroupAlgebra:
    if spec.get("table") is not None:
        flat = np.asarray(spec["table"], dtype=int)
        order = spec.get("order") or int(round(np.sqrt(flat.size)))
        if order * order != flat.size:
            raise InvalidDescriptorException(
                f"group table of {flat.size} entries is not a square of order {order}"
            )
        return GroupAlgebra(flat.reshape(order, order), name=spec.get("name"))

    family = spec.get("group")
    if family not in NAMED_GROUPS:
        raise InvalidDescriptorException(
            f"group_algebra needs 'table' or 'group' in {sorted(NAMED_GROUPS)}, got {family!r}"
        )
    return NAMED_GROUPS[family](int(_require(spec, "order")))


def build_descriptor(spec: Mapping[str, Any]) -> AlgebraDescriptor:
    """
    Build a descriptor from its JSON specification.

    Args:
        spec: Dict with 'kind' plus the kind-specific fields
              (size | blocks | points/weights/grid_size | table/order | group/order)

    Returns:
        The matching AlgebraDescriptor

    Raises:
        InvalidDescriptorException: If the kind is unknown or fields are invalid
    """
    if hasattr(spec, "model_dump"):
        spec = spec.model_dump(exclude_none=True)
    kind = spec.get("kind")

    if kind == "scalar":
        return ScalarAlgebra()
    elif kind == "dense_matrix":
        return DenseMatrixAlgebra(_require(spec, "size"))
    elif kind == "circulant":
        return CirculantAlgebra(_require(spec, "size"))
    elif kind == "block_diagonal":
        return BlockDiagonalAlgebra(_require(spec, "blocks"))
    elif kind == "grid_function":
        if spec.get("points") is not None:
            return GridFunctionAlgebra(np.asarray(spec["points"], dtype=float), spec.get("weights"))
        return GridFunctionAlgebra.uniform(int(_require(spec, "size")))
    elif kind == "group_algebra":
        return _build_group(spec)

    raise InvalidDescriptorException(f"Unknown algebra kind: {kind!r}. Known kinds: {', '.join(ALGEBRA_KINDS)}")
