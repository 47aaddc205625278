"""Coordinatewise activations.

Complex coordinates are activated split-wise: sigma(u) = sigma(Re u) + i sigma(Im u).
On grid-function algebras this is the pointwise activation of C(Z).
"""

from abc import ABC, abstractmethod
from typing import Dict, Type, Union

import numpy as np

from app.models import ActivationSpec


class Activation(ABC):
    """Base class for real activations applied split-wise to complex coordinates."""

    @property
    @abstractmethod
    def name(self) -> str:
        """Activation name."""
        pass

    @property
    def is_linear(self) -> bool:
        """True if sigma(sum c_i u_i + b) = sum sigma(c_i) u_i + sigma(b)."""
        return False

    @property
    def is_smooth(self) -> bool:
        return True

    @abstractmethod
    def real(self, t: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def real_derivative(self, t: np.ndarray) -> np.ndarray:
        pass

    def __call__(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=complex)
        return self.real(u.real) + 1j * self.real(u.imag)

    def backward(self, pre: np.ndarray, grad: np.ndarray) -> np.ndarray:
        """Pull the gradient g = dL/dRe + i dL/dIm of the output back to the pre-activation."""
        return self.real_derivative(pre.real) * grad.real + 1j * self.real_derivative(pre.imag) * grad.imag

    def spec(self) -> ActivationSpec:
        return ActivationSpec(name=self.name)

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class Identity(Activation):
    @property
    def name(self) -> str:
        return "identity"

    @property
    def is_linear(self) -> bool:
        return True

    def real(self, t: np.ndarray) -> np.ndarray:
        return t

    def real_derivative(self, t: np.ndarray) -> np.ndarray:
        return np.ones_like(t)


class Linear(Activation):
    """sigma(t) = s t."""

    def __init__(self, slope: float = 1.0):
        self.slope = float(slope)

    @property
    def name(self) -> str:
        return "linear"

    @property
    def is_linear(self) -> bool:
        return True

    def real(self, t: np.ndarray) -> np.ndarray:
        return self.slope * t

    def real_derivative(self, t: np.ndarray) -> np.ndarray:
        return np.full_like(t, self.slope)

    def spec(self) -> ActivationSpec:
        return ActivationSpec(name=self.name, slope=self.slope)

    def __repr__(self) -> str:
        return f"Linear(slope={self.slope})"


class ReLU(Activation):
    @property
    def name(self) -> str:
        return "relu"

    @property
    def is_smooth(self) -> bool:
        return False

    def real(self, t: np.ndarray) -> np.ndarray:
        return np.maximum(t, 0.0)

    def real_derivative(self, t: np.ndarray) -> np.ndarray:
        return (t > 0).astype(float)


class Tanh(Activation):
    @property
    def name(self) -> str:
        return "tanh"

    def real(self, t: np.ndarray) -> np.ndarray:
        return np.tanh(t)

    def real_derivative(self, t: np.ndarray) -> np.ndarray:
        return 1.0 - np.tanh(t) ** 2


ACTIVATIONS: Dict[str, Type[Activation]] = {
    "identity": Identity,
    "linear": Linear,
    "relu": ReLU,
    "tanh": Tanh,
}


def build_activation(spec: Union[str, ActivationSpec, Activation], slope: float = 1.0) -> Activation:
    """Build an activation from a name, an ActivationSpec or an existing instance."""
    if isinstance(spec, Activation):
        return spec
    if isinstance(spec, ActivationSpec):
        name, slope = spec.name, spec.slope
    else:
        name = spec
    if name not in ACTIVATIONS:
        raise ValueError(f"Unknown activation '{name}'. Known: {', '.join(ACTIVATIONS)}")
    if name == "linear":
        return Linear(slope)
    return ACTIVATIONS[name]()
