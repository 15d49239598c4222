"""Differentiable elementwise operations, reductions and reshaping.

Binary operations accept operands of equal shape, scalars, or operands of equal rank
whose extents are either equal or 1 (e.g. per-channel statistics with ``keepdims``).
Anything else has to be reshaped explicitly.
"""
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import ShapeMismatchError
from .tensor import Tensor, as_tensor, record_op

Axis = Optional[Union[int, Tuple[int, ...]]]
Operand = Union[Tensor, float, int, np.ndarray]


def _check_binary(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape == b.shape or a.ndim == 0 or b.ndim == 0:
        return

    compatible = a.ndim == b.ndim and all(
        sa == sb or sa == 1 or sb == 1 for sa, sb in zip(a.shape, b.shape)
    )
    if not compatible:
        raise ShapeMismatchError(f"Cannot apply '{op}' to shapes {a.shape} and {b.shape}")


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    if len(shape) == 0:
        return np.asarray(grad.sum(), dtype=grad.dtype)
    axes = tuple(i for i, (g, s) in enumerate(zip(grad.shape, shape)) if s == 1 and g != 1)
    return grad.sum(axis=axes, keepdims=True)


def _pair(a: Operand, b: Operand, op: str) -> Tuple[Tensor, Tensor]:
    if isinstance(a, Tensor):
        b = as_tensor(b, like=a)
    else:
        a = as_tensor(a, like=b)
    _check_binary(a, b, op)
    return a, b


def add(a: Operand, b: Operand) -> Tensor:
    a, b = _pair(a, b, "add")

    def backward(grad: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(grad, a.shape), _unbroadcast(grad, b.shape)

    return record_op(a.data + b.data, (a, b), backward, "add")


def sub(a: Operand, b: Operand) -> Tensor:
    a, b = _pair(a, b, "sub")

    def backward(grad: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(grad, a.shape), _unbroadcast(-grad, b.shape)

    return record_op(a.data - b.data, (a, b), backward, "sub")


def mul(a: Operand, b: Operand) -> Tensor:
    a, b = _pair(a, b, "mul")

    def backward(grad: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(grad * b.data, a.shape), _unbroadcast(grad * a.data, b.shape)

    return record_op(a.data * b.data, (a, b), backward, "mul")


def div(a: Operand, b: Operand) -> Tensor:
    a, b = _pair(a, b, "div")

    def backward(grad: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        grad_a = grad / b.data
        grad_b = -grad * a.data / (b.data * b.data)
        return _unbroadcast(grad_a, a.shape), _unbroadcast(grad_b, b.shape)

    return record_op(a.data / b.data, (a, b), backward, "div")


def neg(x: Tensor) -> Tensor:
    return record_op(-x.data, (x,), lambda grad: (-grad,), "neg")


def power(x: Tensor, exponent: float) -> Tensor:
    """Raise to a constant scalar power."""

    def backward(grad: np.ndarray) -> Tuple[np.ndarray]:
        return (grad * exponent * x.data ** (exponent - 1),)

    return record_op(x.data**exponent, (x,), backward, "pow")


def exp(x: Tensor) -> Tensor:
    out = np.exp(x.data)
    return record_op(out, (x,), lambda grad: (grad * out,), "exp")


def log(x: Tensor) -> Tensor:
    return record_op(np.log(x.data), (x,), lambda grad: (grad / x.data,), "log")


def sqrt(x: Tensor) -> Tensor:
    out = np.sqrt(x.data)
    return record_op(out, (x,), lambda grad: (grad * 0.5 / out,), "sqrt")


def absolute(x: Tensor) -> Tensor:
    return record_op(np.abs(x.data), (x,), lambda grad: (grad * np.sign(x.data),), "abs")


def tanh(x: Tensor) -> Tensor:
    out = np.tanh(x.data)
    return record_op(out, (x,), lambda grad: (grad * (1.0 - out * out),), "tanh")


def sigmoid(x: Tensor) -> Tensor:
    # tanh form does not overflow for large |x|
    out = 0.5 * (1.0 + np.tanh(0.5 * x.data))
    return record_op(out, (x,), lambda grad: (grad * out * (1.0 - out),), "sigmoid")


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    return record_op(x.data * mask, (x,), lambda grad: (grad * mask,), "relu")


def leaky_relu(x: Tensor, slope: float = 0.2) -> Tensor:
    factor = np.where(x.data > 0, 1.0, slope).astype(x.dtype)
    return record_op(x.data * factor, (x,), lambda grad: (grad * factor,), "leaky_relu")


def clip(x: Tensor, low: float, high: float) -> Tensor:
    """Clamp values, gradient passes only inside [low, high]."""
    mask = (x.data >= low) & (x.data <= high)
    return record_op(np.clip(x.data, low, high), (x,), lambda grad: (grad * mask,), "clip")


def _expand_reduced(
    grad: np.ndarray, shape: Tuple[int, ...], axis: Axis, keepdims: bool
) -> np.ndarray:
    if axis is not None and not keepdims:
        axes = (axis,) if isinstance(axis, int) else axis
        axes = tuple(a % len(shape) for a in axes)
        grad = np.expand_dims(grad, axes)
    return np.broadcast_to(grad, shape).copy()


def sum(x: Tensor, axis: Axis = None, keepdims: bool = False) -> Tensor:  # noqa: A001
    def backward(grad: np.ndarray) -> Tuple[np.ndarray]:
        return (_expand_reduced(grad, x.shape, axis, keepdims),)

    out = np.asarray(x.data.sum(axis=axis, keepdims=keepdims), dtype=x.dtype)
    return record_op(out, (x,), backward, "sum")


def mean(x: Tensor, axis: Axis = None, keepdims: bool = False) -> Tensor:
    out = np.asarray(x.data.mean(axis=axis, keepdims=keepdims), dtype=x.dtype)
    count = x.size // max(out.size, 1)

    def backward(grad: np.ndarray) -> Tuple[np.ndarray]:
        return (_expand_reduced(grad / count, x.shape, axis, keepdims),)

    return record_op(out, (x,), backward, "mean")


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    return record_op(
        x.data.reshape(shape), (x,), lambda grad: (grad.reshape(x.shape),), "reshape"
    )


def transpose(x: Tensor, axes: Sequence[int]) -> Tensor:
    inverse = np.argsort(axes)
    return record_op(
        np.ascontiguousarray(x.data.transpose(axes)),
        (x,),
        lambda grad: (grad.transpose(inverse),),
        "transpose",
    )


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    """Join tensors along an existing axis."""
    others = [t.shape[:axis] + t.shape[axis + 1 :] for t in tensors]
    if len(set(others)) != 1:
        raise ShapeMismatchError(
            f"Cannot concatenate shapes {[t.shape for t in tensors]} along axis {axis}"
        )

    splits = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(grad: np.ndarray) -> Tuple[np.ndarray, ...]:
        return tuple(np.split(grad, splits, axis=axis))

    data = np.concatenate([t.data for t in tensors], axis=axis)
    return record_op(data, tuple(tensors), backward, "concat")


def matmul(a: Tensor, b: Operand) -> Tensor:
    """Matrix product of two 2-D tensors."""
    b = as_tensor(b, like=a)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeMismatchError(f"Cannot multiply matrices of shapes {a.shape} and {b.shape}")

    def backward(grad: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return grad @ b.data.T, a.data.T @ grad

    return record_op(a.data @ b.data, (a, b), backward, "matmul")


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def backward(grad: np.ndarray) -> Tuple[np.ndarray]:
        return (out * (grad - (grad * out).sum(axis=axis, keepdims=True)),)

    return record_op(out, (x,), backward, "softmax")


def instance_norm(x: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize each channel of each sample over its spatial positions.

    Parameters
    ----------
    x : Tensor of shape (N, C, H, W)
    eps : float, default = 1e-5
        Added to the variance.

    Returns
    -------
    Tensor of shape (N, C, H, W)
    """
    if x.ndim != 4:
        raise ShapeMismatchError(f"instance_norm expects (N, C, H, W), got {x.shape}")

    centered = sub(x, mean(x, axis=(2, 3), keepdims=True))
    variance = mean(mul(centered, centered), axis=(2, 3), keepdims=True)
    return div(centered, sqrt(add(variance, eps)))


Tensor.__add__ = add
Tensor.__radd__ = lambda self, other: add(other, self)
Tensor.__sub__ = sub
Tensor.__rsub__ = lambda self, other: sub(other, self)
Tensor.__mul__ = mul
Tensor.__rmul__ = lambda self, other: mul(other, self)
Tensor.__truediv__ = div
Tensor.__rtruediv__ = lambda self, other: div(other, self)
Tensor.__neg__ = neg
Tensor.__pow__ = power
Tensor.__matmul__ = matmul
Tensor.sum = sum
Tensor.mean = mean
Tensor.reshape = lambda self, *shape: reshape(
    self, shape[0] if len(shape) == 1 and not isinstance(shape[0], int) else shape
)
Tensor.transpose = transpose
