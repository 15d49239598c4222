"""Decoder from injected features to a one-channel sketch in [-1, 1]."""
import numpy as np

from ..core import Tensor, tanh, upsample_nearest2x
from ..nn import Conv2d, Module
from .common import ConvBlock, ResBlock, as_batch


class Decoder(Module):
    """Residual blocks, two nearest-neighbour x2 upsamplings with convolutions, tanh output.

    Parameters
    ----------
    in_channels : int
    rng : np.random.Generator
    base_channels : int, default = 16
    num_blocks : int, default = 3
    """

    def __init__(
        self: "Decoder",
        in_channels: int,
        rng: np.random.Generator,
        base_channels: int = 16,
        num_blocks: int = 3,
    ) -> None:
        self.blocks = [ResBlock(in_channels, rng) for _ in range(num_blocks)]
        self.up_1 = ConvBlock(in_channels, 2 * base_channels, 3, rng)
        self.up_2 = ConvBlock(2 * base_channels, base_channels, 3, rng)
        self.output = Conv2d(base_channels, 1, 3, rng)

    def forward(self: "Decoder", z: Tensor) -> Tensor:
        x, added = as_batch(z)

        for block in self.blocks:
            x = block(x)
        x = self.up_1(upsample_nearest2x(x))
        x = self.up_2(upsample_nearest2x(x))
        x = tanh(self.output(x))

        return x.reshape(x.shape[1:]) if added else x
