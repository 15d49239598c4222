"""Building blocks shared by the encoders, the decoder and the discriminator."""
from typing import Optional, Tuple

import numpy as np

from ..core import Tensor, instance_norm, leaky_relu
from ..errors import ShapeMismatchError
from ..nn import Conv2d, Module

LEAKY_SLOPE = 0.2


def as_batch(x: Tensor) -> Tuple[Tensor, bool]:
    """Add a batch axis to a (C, H, W) image, report whether one was added."""
    if x.ndim == 3:
        return x.reshape((1,) + x.shape), True
    if x.ndim != 4:
        raise ShapeMismatchError(f"Expected a (C, H, W) or (N, C, H, W) image, got {x.shape}")
    return x, False


class ConvBlock(Module):
    """Convolution, optional instance normalization and leaky ReLU.

    Parameters
    ----------
    in_channels, out_channels : int
    kernel_size : int
    rng : np.random.Generator
    stride : int, default = 1
    padding : int, optional
    norm : bool, default = True
    """

    def __init__(
        self: "ConvBlock",
        in_channels: int,
        out_channels: int,
        kernel_size: int,
        rng: np.random.Generator,
        stride: int = 1,
        padding: Optional[int] = None,
        norm: bool = True,
    ) -> None:
        self.conv = Conv2d(in_channels, out_channels, kernel_size, rng, stride, padding)
        self.norm = norm

    def forward(self: "ConvBlock", x: Tensor) -> Tensor:
        x = self.conv(x)
        if self.norm:
            x = instance_norm(x)
        return leaky_relu(x, LEAKY_SLOPE)


class ResBlock(Module):
    """Two 3x3 convolutions with instance normalization and an identity shortcut."""

    def __init__(self: "ResBlock", channels: int, rng: np.random.Generator) -> None:
        self.conv_1 = Conv2d(channels, channels, 3, rng)
        self.conv_2 = Conv2d(channels, channels, 3, rng)

    def forward(self: "ResBlock", x: Tensor) -> Tensor:
        hidden = leaky_relu(instance_norm(self.conv_1(x)), LEAKY_SLOPE)
        return x + instance_norm(self.conv_2(hidden))
