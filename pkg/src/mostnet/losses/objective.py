"""Reconstruction loss and the weighted sum of all objective terms."""
from dataclasses import asdict, dataclass, fields
from typing import Dict, Union

from ..core import Tensor, absolute
from ..errors import ConfigError, ShapeMismatchError

Scalar = Union[Tensor, float]

COMPONENTS = ("adversarial", "reconstruction", "style", "content", "memory_refinement")


@dataclass
class LossWeights:
    """Coefficients of the five objective terms.

    Parameters
    ----------
    adversarial : float, default = 1
    reconstruction : float, default = 200
    style : float, default = 40
    content : float, default = 40
    memory_refinement : float, default = 10
    """

    adversarial: float = 1.0
    reconstruction: float = 200.0
    style: float = 40.0
    content: float = 40.0
    memory_refinement: float = 10.0

    def __post_init__(self: "LossWeights") -> None:
        for item in fields(self):
            value = getattr(self, item.name)
            if value < 0:
                raise ConfigError(f"Loss weight '{item.name}' must be >= 0, got {value}")

    def to_dict(self: "LossWeights") -> Dict[str, float]:
        return asdict(self)


@dataclass
class LossComponents:
    """Unweighted objective terms, Tensors during training or floats for reporting."""

    adversarial: Scalar = 0.0
    reconstruction: Scalar = 0.0
    style: Scalar = 0.0
    content: Scalar = 0.0
    memory_refinement: Scalar = 0.0

    def values(self: "LossComponents") -> Dict[str, float]:
        return {
            name: float(value.data) if isinstance(value, Tensor) else float(value)
            for name, value in ((name, getattr(self, name)) for name in COMPONENTS)
        }

    def weighted_sum(self: "LossComponents", weights: "LossWeights") -> float:
        """Weighted sum of :meth:`values` in 64-bit floats, zero-weight terms left out."""
        values = self.values()
        return sum(
            getattr(weights, name) * values[name]
            for name in COMPONENTS
            if getattr(weights, name) != 0
        )


def reconstruction_loss(fake: Tensor, real: Tensor) -> Tensor:
    """Mean absolute difference."""
    if fake.shape != real.shape:
        raise ShapeMismatchError(
            f"Reconstruction loss needs equal shapes, got {fake.shape} and {real.shape}"
        )
    return absolute(fake - real).mean()


def total_loss(components: LossComponents, weights: LossWeights) -> Scalar:
    """Weighted sum of the components, terms with zero weight are left out entirely."""
    total: Scalar = 0.0
    for name in COMPONENTS:
        weight = getattr(weights, name)
        if weight == 0:
            continue
        total = getattr(components, name) * weight + total
    return total
