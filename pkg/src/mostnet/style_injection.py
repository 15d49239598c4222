"""Style injection: content features normalized per channel and modulated per pixel.

The modulation parameters gamma and beta are predicted from a style feature map of the same
spatial size, in the manner of spatially-adaptive denormalization.
"""
import logging
from typing import Optional, Tuple

import numpy as np

from .core import Tensor, instance_norm, leaky_relu, relu
from .errors import ShapeMismatchError
from .nn import Conv2d, Module

LOGGER = logging.getLogger(__name__)

NORM_EPS = 1.0e-5
LEAKY_SLOPE = 0.2


def _batched(x: Tensor) -> Tensor:
    return x.reshape((1,) + x.shape) if x.ndim == 3 else x


def normalize(content: Tensor, eps: float = NORM_EPS) -> Tensor:
    """Subtract the per-channel spatial mean and divide by sqrt(variance + eps)."""
    if content.ndim == 3:
        return normalize(_batched(content), eps).reshape(content.shape)
    return instance_norm(content, eps)


class SIModule(Module):
    """Style injection module.

    Parameters
    ----------
    content_channels : int
    style_channels : int
    rng : np.random.Generator
    hidden_channels : int, default = 64
        Width of the shared convolution applied to the style map.
    eps : float, default = 1e-5

    Notes
    -----
    The gamma convolution starts with zero weights and unit bias, so that a fresh module
    applies gamma = 1 everywhere.
    """

    def __init__(
        self: "SIModule",
        content_channels: int,
        style_channels: int,
        rng: np.random.Generator,
        hidden_channels: int = 64,
        eps: float = NORM_EPS,
    ) -> None:
        self.eps = eps
        self.shared = Conv2d(style_channels, hidden_channels, 3, rng)
        self.gamma_conv = Conv2d(
            hidden_channels, content_channels, 3, rng, weight_init="zeros", bias_value=1.0
        )
        self.beta_conv = Conv2d(hidden_channels, content_channels, 3, rng)

    def modulation(self: "SIModule", style: Tensor) -> Tuple[Tensor, Tensor]:
        """Predict per-pixel gamma and beta from a batched style map."""
        hidden = relu(self.shared(style))
        return self.gamma_conv(hidden), self.beta_conv(hidden)

    def forward(self: "SIModule", content: Tensor, style: Tensor) -> Tensor:
        if content.ndim != style.ndim or content.shape[-2:] != style.shape[-2:]:
            raise ShapeMismatchError(
                f"Content shape {content.shape} and style shape {style.shape} "
                "must share spatial extents"
            )

        if content.ndim == 3:
            return self.forward(_batched(content), _batched(style)).reshape(content.shape)

        if content.shape[0] != style.shape[0]:
            raise ShapeMismatchError(
                f"Content shape {content.shape} and style shape {style.shape} differ in batch size"
            )

        gamma, beta = self.modulation(style)
        return gamma * normalize(content, self.eps) + beta


def si_modulate(module: SIModule, content: Tensor, style: Tensor) -> Tensor:
    """Apply a style injection module, ``gamma(style) * normalize(content) + beta(style)``."""
    return module(content, style)


class SIResBlock(Module):
    """Residual block with style injection before each convolution.

    Main path: SI, activation, conv, SI, activation, conv. The shortcut is the identity when
    channel counts agree and SI followed by a 1x1 conv otherwise.

    Parameters
    ----------
    in_channels, out_channels : int
    style_channels : int
    rng : np.random.Generator
    hidden_channels : int, default = 64
    """

    def __init__(
        self: "SIResBlock",
        in_channels: int,
        out_channels: int,
        style_channels: int,
        rng: np.random.Generator,
        hidden_channels: int = 64,
    ) -> None:
        middle = min(in_channels, out_channels)

        self.si_1 = SIModule(in_channels, style_channels, rng, hidden_channels)
        self.conv_1 = Conv2d(in_channels, middle, 3, rng)
        self.si_2 = SIModule(middle, style_channels, rng, hidden_channels)
        self.conv_2 = Conv2d(middle, out_channels, 3, rng)

        self.si_shortcut: Optional[SIModule] = None
        self.conv_shortcut: Optional[Conv2d] = None
        if in_channels != out_channels:
            self.si_shortcut = SIModule(in_channels, style_channels, rng, hidden_channels)
            self.conv_shortcut = Conv2d(in_channels, out_channels, 1, rng, bias=False)

    def shortcut(self: "SIResBlock", content: Tensor, style: Tensor) -> Tensor:
        if self.conv_shortcut is None:
            return content
        return self.conv_shortcut(self.si_shortcut(content, style))

    def forward(self: "SIResBlock", content: Tensor, style: Tensor) -> Tensor:
        if content.ndim == 3:
            out = self.forward(_batched(content), _batched(style))
            return out.reshape(out.shape[1:])

        hidden = self.conv_1(leaky_relu(self.si_1(content, style), LEAKY_SLOPE))
        hidden = self.conv_2(leaky_relu(self.si_2(hidden, style), LEAKY_SLOPE))
        return self.shortcut(content, style) + hidden


def si_resblock(block: SIResBlock, content: Tensor, style: Tensor) -> Tensor:
    """Apply a style injection residual block, spatial extents are preserved."""
    return block(content, style)
