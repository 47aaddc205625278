"""Conversion between numpy/domain objects and the pydantic payloads."""

import json
from pathlib import Path
from typing import Type, TypeVar, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from app.algebra import AlgebraElement
from app.algebras import AlgebraDescriptor, build_descriptor
from app.exceptions import DatasetException, DescriptorMismatchException, ShapeMismatchException
from app.hilbert_module import ModuleVector
from app.models import AlgebraSpec, ComplexArrayPayload, ElementPayload, ModuleVectorPayload

ModelT = TypeVar("ModelT", bound=BaseModel)


def array_to_payload(array: np.ndarray) -> ComplexArrayPayload:
    array = np.asarray(array, dtype=complex)
    return ComplexArrayPayload(
        shape=list(array.shape),
        re=array.real.ravel().tolist(),
        im=array.imag.ravel().tolist(),
    )


def payload_to_array(payload: ComplexArrayPayload) -> np.ndarray:
    """Rebuild a complex array, checking that the data length matches the shape."""
    size = int(np.prod(payload.shape, dtype=int))
    if len(payload.re) != size or len(payload.im) != size:
        raise ShapeMismatchException(
            f"array payload of shape {payload.shape} needs {size} values, "
            f"got re={len(payload.re)} im={len(payload.im)}"
        )
    re = np.asarray(payload.re, dtype=float)
    im = np.asarray(payload.im, dtype=float)
    return (re + 1j * im).reshape(payload.shape)


def descriptor_to_spec(descriptor: AlgebraDescriptor) -> AlgebraSpec:
    return AlgebraSpec(**descriptor.spec())


def descriptor_from_spec(spec: AlgebraSpec) -> AlgebraDescriptor:
    return build_descriptor(spec)


def element_to_payload(element: AlgebraElement) -> ElementPayload:
    array = array_to_payload(element.coords)
    return ElementPayload(kind=element.kind, **array.model_dump())


def element_from_payload(payload: ElementPayload, descriptor: AlgebraDescriptor) -> AlgebraElement:
    """Rebuild an element of ``descriptor``.

    Raises:
        DescriptorMismatchException: If the payload kind differs from the descriptor kind
    """
    if payload.kind != descriptor.kind:
        raise DescriptorMismatchException(
            f"element of kind '{payload.kind}' cannot belong to a {descriptor.kind} algebra"
        )
    return AlgebraElement(descriptor, payload_to_array(payload))


def vector_to_payload(vector: ModuleVector) -> ModuleVectorPayload:
    return ModuleVectorPayload(
        descriptor=descriptor_to_spec(vector.descriptor),
        entries=[element_to_payload(entry) for entry in vector.entries],
    )


def vector_from_payload(payload: ModuleVectorPayload) -> ModuleVector:
    descriptor = descriptor_from_spec(payload.descriptor)
    return ModuleVector.from_elements([element_from_payload(entry, descriptor) for entry in payload.entries])


def write_model(path: Union[str, Path], model: BaseModel) -> Path:
    """Write a payload as indented JSON, creating parent directories."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2) + "\n")
    return path


def read_model(path: Union[str, Path], model_cls: Type[ModelT]) -> ModelT:
    """Load and validate a JSON payload file.

    Raises:
        FileNotFoundError: If the file does not exist
        DatasetException: If the file is not valid JSON for ``model_cls``
    """
    path = Path(path)
    text = path.read_text()
    try:
        return model_cls.model_validate(json.loads(text))
    except json.JSONDecodeError as e:
        raise DatasetException(f"{path}: line {e.lineno}: invalid JSON: {e.msg}") from e
    except ValidationError as e:
        raise DatasetException(f"{path}: invalid {model_cls.__name__}: {e}") from e
