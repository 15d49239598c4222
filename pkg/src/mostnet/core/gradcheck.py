"""Comparison of analytic gradients against central finite differences."""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from ..errors import GradientError
from .tensor import Tensor, backward, no_grad

LOGGER = logging.getLogger(__name__)


@dataclass
class GradCheckReport:
    """Outcome of a gradient check.

    Parameters
    ----------
    max_errors : dict(str, float)
        Maximum relative error per checked tensor.
    failures : list of str
        Human readable reasons, empty if the check passed.
    tolerance : float
    """

    max_errors: Dict[str, float] = field(default_factory=dict)
    failures: List[str] = field(default_factory=list)
    tolerance: float = 1.0e-3

    @property
    def passed(self: "GradCheckReport") -> bool:
        return not self.failures

    @property
    def max_error(self: "GradCheckReport") -> float:
        return max(self.max_errors.values(), default=0.0)

    def __bool__(self: "GradCheckReport") -> bool:
        return self.passed


def grad_check(
    fn: Callable[..., Tensor],
    inputs: Sequence[Tensor],
    step: float = 1.0e-4,
    tolerance: float = 1.0e-3,
    max_elements: Optional[int] = None,
    abs_floor: float = 1.0e-3,
    seed: int = 0,
) -> GradCheckReport:
    """Compare analytic gradients of a scalar function with central differences.

    The relative error of an element is ``|a - n| / max(|a|, |n|, abs_floor)``
    so that gradients near zero are compared in absolute terms.

    Parameters
    ----------
    fn : callable
        Called as ``fn(*inputs)``, must return a scalar Tensor.
    inputs : sequence of Tensor
        64-bit tensors with ``requires_grad`` set.
    step : float, default = 1e-4
    tolerance : float, default = 1e-3
    max_elements : int, optional
        Check only a random subset of this many elements per input.
    abs_floor : float, default = 1e-3
    seed : int, default = 0
        Seed of the element subset.

    Returns
    -------
    GradCheckReport
    """
    for i, tensor in enumerate(inputs):
        if tensor.dtype != np.float64:
            raise GradientError(
                f"Gradient check requires 64-bit inputs, input {i} is {tensor.dtype}"
            )
        tensor.requires_grad = True
        tensor.zero_grad()

    loss = fn(*inputs)
    backward(loss)

    report = GradCheckReport(tolerance=tolerance)
    rng = np.random.default_rng(seed)

    for i, tensor in enumerate(inputs):
        label = tensor.name or f"input{i}"
        analytic = tensor.grad if tensor.grad is not None else np.zeros_like(tensor.data)

        if not np.all(np.isfinite(analytic)):
            report.failures.append(f"{label}: analytic gradient contains NaN or inf")
            continue

        indices = list(np.ndindex(tensor.shape))
        if max_elements is not None and len(indices) > max_elements:
            chosen = rng.choice(len(indices), size=max_elements, replace=False)
            indices = [indices[k] for k in sorted(chosen)]

        worst = 0.0
        with no_grad():
            for index in indices:
                original = tensor.data[index]
                tensor.data[index] = original + step
                plus = float(fn(*inputs).data)
                tensor.data[index] = original - step
                minus = float(fn(*inputs).data)
                tensor.data[index] = original

                numeric = (plus - minus) / (2.0 * step)
                if not np.isfinite(numeric):
                    report.failures.append(f"{label}{index}: numeric gradient is not finite")
                    break

                a = float(analytic[index])
                error = abs(a - numeric) / max(abs(a), abs(numeric), abs_floor)
                worst = max(worst, error)

        report.max_errors[label] = worst
        if worst > tolerance:
            report.failures.append(
                f"{label}: max relative error {worst:.3e} exceeds tolerance {tolerance:.1e}"
            )

    LOGGER.debug("Gradient check max errors: %s", report.max_errors)
    return report
