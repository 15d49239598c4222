"""Photo and sketch encoders.

Both encoders share one layer structure: a stem convolution followed by two stages, each a
stride-2 convolution and a stack of residual blocks. Only the number of input channels
differs (3 for photos, 1 for sketches).
"""
import logging

import numpy as np

from ..core import Tensor
from ..errors import ShapeMismatchError
from ..nn import Module
from .common import ConvBlock, ResBlock, as_batch

LOGGER = logging.getLogger(__name__)

DOWNSAMPLING = 4


class Encoder(Module):
    """Map an image of H x W to a feature map of H/4 x W/4.

    Parameters
    ----------
    in_channels : int
    rng : np.random.Generator
    base_channels : int, default = 16
        Width after the stem, doubled by the first stage.
    out_channels : int, default = 64
        Slot dimension c.
    blocks_per_stage : int, default = 2
    """

    def __init__(
        self: "Encoder",
        in_channels: int,
        rng: np.random.Generator,
        base_channels: int = 16,
        out_channels: int = 64,
        blocks_per_stage: int = 2,
    ) -> None:
        middle = 2 * base_channels

        self.in_channels = in_channels
        self.stem = ConvBlock(in_channels, base_channels, 3, rng, norm=False)
        self.down_1 = ConvBlock(base_channels, middle, 3, rng, stride=2)
        self.stage_1 = [ResBlock(middle, rng) for _ in range(blocks_per_stage)]
        self.down_2 = ConvBlock(middle, out_channels, 3, rng, stride=2)
        self.stage_2 = [ResBlock(out_channels, rng) for _ in range(blocks_per_stage)]

    def forward(self: "Encoder", image: Tensor) -> Tensor:
        """Encode a (C, H, W) or (N, C, H, W) image, H and W divisible by 4."""
        x, added = as_batch(image)
        _, c, h, w = x.shape

        if c != self.in_channels:
            raise ShapeMismatchError(
                f"Encoder expects {self.in_channels} input channels"
                f", got image of shape {image.shape}"
            )

        if h % DOWNSAMPLING or w % DOWNSAMPLING:
            raise ShapeMismatchError(
                f"Image extents must be divisible by {DOWNSAMPLING}"
                f", got image of shape {image.shape}"
            )

        x = self.stem(x)
        x = self.down_1(x)
        for block in self.stage_1:
            x = block(x)
        x = self.down_2(x)
        for block in self.stage_2:
            x = block(x)

        return x.reshape(x.shape[1:]) if added else x
