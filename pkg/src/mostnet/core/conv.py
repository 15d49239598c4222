"""Spatial operations on (N, C, H, W) tensors: convolution, upsampling, pooling."""
from typing import Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ShapeMismatchError
from .functional import reshape
from .tensor import Tensor, record_op


def _pad(data: np.ndarray, ph: int, pw: int) -> np.ndarray:
    """Zero padding of the two trailing axes."""
    if ph == 0 and pw == 0:
        return data
    n, c, h, w = data.shape
    out = np.zeros((n, c, h + 2 * ph, w + 2 * pw), dtype=data.dtype)
    out[:, :, ph : ph + h, pw : pw + w] = data
    return out


def _im2col(
    padded: np.ndarray, kh: int, kw: int, stride: int, h_out: int, w_out: int
) -> np.ndarray:
    """Gather convolution windows into rows of shape (N * h_out * w_out, C * kh * kw)."""
    n, c = padded.shape[:2]
    windows = sliding_window_view(padded, (kh, kw), axis=(2, 3))
    windows = windows[:, :, : stride * h_out : stride, : stride * w_out : stride]
    return windows.transpose(0, 2, 3, 1, 4, 5).reshape(n * h_out * w_out, c * kh * kw)


def conv2d(
    x: Tensor,
    weight: Tensor,
    bias: Optional[Tensor] = None,
    stride: int = 1,
    padding: int = 0,
) -> Tensor:
    """Cross-correlate a batch of feature maps with a filter bank.

    Parameters
    ----------
    x : Tensor of shape (N, C_in, H, W) or (C_in, H, W)
    weight : Tensor of shape (C_out, C_in, kh, kw)
    bias : Tensor of shape (C_out,), optional
    stride : int, default = 1
    padding : int, default = 0
        Zero padding on every side.

    Returns
    -------
    Tensor of shape (N, C_out, H', W') or (C_out, H', W')
        H' = floor((H + 2 * padding - kh) / stride) + 1.
    """
    if x.ndim == 3:
        out = conv2d(reshape(x, (1,) + x.shape), weight, bias, stride, padding)
        return reshape(out, out.shape[1:])

    if x.ndim != 4 or weight.ndim != 4:
        raise ShapeMismatchError(
            f"conv2d expects (N, C, H, W) input and 4-D weight, got {x.shape} and {weight.shape}"
        )

    if stride < 1 or padding < 0:
        raise ValueError(f"stride must be >= 1 and padding >= 0, got {stride} and {padding}")

    n, c, h, w = x.shape
    c_out, c_in, kh, kw = weight.shape

    if c != c_in:
        raise ShapeMismatchError(
            f"Input shape {x.shape} does not match weight shape {weight.shape}: "
            f"{c} != {c_in} input channels"
        )

    if h + 2 * padding < kh or w + 2 * padding < kw:
        raise ShapeMismatchError(
            f"Kernel of weight shape {weight.shape} does not fit input shape {x.shape} "
            f"with padding {padding}"
        )

    if bias is not None and bias.shape != (c_out,):
        raise ShapeMismatchError(
            f"Bias shape {bias.shape} does not match weight shape {weight.shape}"
        )

    h_out = (h + 2 * padding - kh) // stride + 1
    w_out = (w + 2 * padding - kw) // stride + 1

    padded = _pad(x.data, padding, padding)
    cols = _im2col(padded, kh, kw, stride, h_out, w_out)
    w_mat = weight.data.reshape(c_out, -1)

    out = cols @ w_mat.T
    if bias is not None:
        out = out + bias.data
    out = np.ascontiguousarray(out.reshape(n, h_out, w_out, c_out).transpose(0, 3, 1, 2))

    def input_grad(grad: np.ndarray, grad_rows: np.ndarray) -> np.ndarray:
        if stride == 1 and padding < kh and padding < kw:
            # correlation of the output gradient with the flipped, channel-swapped kernel
            grad_cols = _im2col(_pad(grad, kh - 1 - padding, kw - 1 - padding), kh, kw, 1, h, w)
            flipped = weight.data[:, :, ::-1, ::-1].transpose(1, 0, 2, 3).reshape(c, -1)
            grad_x = (grad_cols @ flipped.T).reshape(n, h, w, c).transpose(0, 3, 1, 2)
        else:
            grad_cols = (grad_rows @ w_mat).T.reshape(c, kh, kw, n, h_out, w_out)
            grad_padded = np.zeros((c, n) + padded.shape[2:], dtype=grad_cols.dtype)
            for i in range(kh):
                for j in range(kw):
                    grad_padded[
                        :, :, i : i + stride * h_out : stride, j : j + stride * w_out : stride
                    ] += grad_cols[:, i, j]
            grad_x = grad_padded[:, :, padding : padding + h, padding : padding + w]
            grad_x = grad_x.transpose(1, 0, 2, 3)
        return np.ascontiguousarray(grad_x, dtype=x.data.dtype)

    def backward(grad: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        grad_rows = grad.transpose(0, 2, 3, 1).reshape(-1, c_out)

        grad_weight = (grad_rows.T @ cols).reshape(weight.shape) if weight.requires_grad else None
        grad_bias = grad_rows.sum(axis=0) if bias is not None and bias.requires_grad else None
        grad_x = input_grad(grad, grad_rows) if x.requires_grad else None

        return (grad_x, grad_weight, grad_bias) if bias is not None else (grad_x, grad_weight)

    parents = (x, weight, bias) if bias is not None else (x, weight)
    return record_op(out, parents, backward, "conv2d")


def upsample_nearest2x(x: Tensor) -> Tensor:
    """Repeat every pixel into a 2x2 block."""
    if x.ndim != 4:
        raise ShapeMismatchError(f"upsample_nearest2x expects (N, C, H, W), got {x.shape}")

    n, c, h, w = x.shape
    out = x.data.repeat(2, axis=2).repeat(2, axis=3)

    def backward(grad: np.ndarray) -> Tuple[np.ndarray]:
        return (grad.reshape(n, c, h, 2, w, 2).sum(axis=(3, 5)),)

    return record_op(out, (x,), backward, "upsample_nearest2x")


def avg_pool2d(x: Tensor) -> Tensor:
    """Average non-overlapping 2x2 blocks, odd trailing rows and columns are dropped."""
    if x.ndim != 4:
        raise ShapeMismatchError(f"avg_pool2d expects (N, C, H, W), got {x.shape}")

    n, c, h, w = x.shape
    if h < 2 or w < 2:
        raise ShapeMismatchError(f"Cannot pool input of shape {x.shape}")

    ho, wo = h // 2, w // 2
    out = x.data[:, :, : 2 * ho, : 2 * wo].reshape(n, c, ho, 2, wo, 2).mean(axis=(3, 5))

    def backward(grad: np.ndarray) -> Tuple[np.ndarray]:
        grad_x = np.zeros_like(x.data)
        grad_x[:, :, : 2 * ho, : 2 * wo] = 0.25 * grad.repeat(2, axis=2).repeat(2, axis=3)
        return (grad_x,)

    return record_op(out, (x,), backward, "avg_pool2d")
