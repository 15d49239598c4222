"""Patch discriminator over (photo, sketch) pairs."""
import numpy as np

from ..core import Tensor, concat, sigmoid
from ..errors import ShapeMismatchError
from ..nn import Conv2d, Module
from .common import ConvBlock, as_batch


class PatchDiscriminator(Module):
    """Score overlapping patches of a channel-concatenated photo and sketch.

    Three stride-2 4x4 convolutions followed by a 3x3 convolution to one channel and a
    sigmoid. A 64x64 pair yields a 6x6 score map.

    Parameters
    ----------
    rng : np.random.Generator
    photo_channels : int, default = 3
    sketch_channels : int, default = 1
    base_channels : int, default = 32
    """

    def __init__(
        self: "PatchDiscriminator",
        rng: np.random.Generator,
        photo_channels: int = 3,
        sketch_channels: int = 1,
        base_channels: int = 32,
    ) -> None:
        in_channels = photo_channels + sketch_channels
        self.stage_1 = ConvBlock(
            in_channels, base_channels, 4, rng, stride=2, padding=1, norm=False
        )
        self.stage_2 = ConvBlock(base_channels, 2 * base_channels, 4, rng, stride=2, padding=1)
        self.stage_3 = ConvBlock(2 * base_channels, 4 * base_channels, 4, rng, stride=2, padding=1)
        self.score = Conv2d(4 * base_channels, 1, 3, rng, padding=0)

    def forward(self: "PatchDiscriminator", photo: Tensor, sketch: Tensor) -> Tensor:
        """Return scores in (0, 1) of shape (N, 1, h, w), or (1, h, w) for unbatched input."""
        photo_batch, added = as_batch(photo)
        sketch_batch, _ = as_batch(sketch)

        same_batch = photo_batch.shape[0] == sketch_batch.shape[0]
        if not same_batch or photo_batch.shape[2:] != sketch_batch.shape[2:]:
            raise ShapeMismatchError(
                f"Photo shape {photo.shape} and sketch shape {sketch.shape} are not aligned"
            )

        x = concat([photo_batch, sketch_batch], axis=1)
        x = self.stage_3(self.stage_2(self.stage_1(x)))
        scores = sigmoid(self.score(x))

        return scores.reshape(scores.shape[1:]) if added else scores


def discriminate(discriminator: PatchDiscriminator, photo: Tensor, sketch: Tensor) -> Tensor:
    return discriminator(photo, sketch)
