"""Fixed multi-level feature extractor and the perceptual style and content losses."""
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..container import read_container, write_container
from ..core import Tensor, avg_pool2d, concat, conv2d, relu
from ..errors import CheckpointError, ShapeMismatchError

LOGGER = logging.getLogger(__name__)

STAGE_CHANNELS = (16, 32, 64, 64)
LEVELS = (1, 2, 3, 4)


class PerceptualExtractor:
    """Pyramid of four ``conv3x3 -> relu -> avg_pool`` stages with frozen weights.

    The output of level i is taken after the i-th pooling and is downsampled by 2**i.
    Single-channel images are replicated to three channels.

    Parameters
    ----------
    seed : int, default = 0
        Seed of the He-normal random weights.
    weights_path : str or Path, optional
        Container file with records ``stage{i}.weight`` and ``stage{i}.bias`` replacing
        the random weights.
    """

    def __init__(
        self: "PerceptualExtractor",
        seed: int = 0,
        weights_path: Optional[Union[str, Path]] = None,
    ) -> None:
        rng = np.random.default_rng(seed)
        self.stages: List[Tuple[np.ndarray, np.ndarray]] = []

        in_channels = 3
        for out_channels in STAGE_CHANNELS:
            fan_in = in_channels * 9
            weight = rng.standard_normal((out_channels, in_channels, 3, 3)) * np.sqrt(2.0 / fan_in)
            self.stages.append((weight, np.zeros(out_channels)))
            in_channels = out_channels

        if weights_path is not None:
            self.load(weights_path)

    def load(self: "PerceptualExtractor", path: Union[str, Path]) -> None:
        records = read_container(path)

        stages = []
        for i, (weight, bias) in enumerate(self.stages):
            try:
                new_weight = records[f"stage{i}.weight"]
                new_bias = records[f"stage{i}.bias"]
            except KeyError as error:
                raise CheckpointError(
                    f"{path} has no record {error} for the perceptual extractor"
                ) from error

            if new_weight.shape != weight.shape or new_bias.shape != bias.shape:
                raise CheckpointError(
                    f"{path}: stage {i} expects weight {weight.shape} and bias {bias.shape}"
                    f", got {new_weight.shape} and {new_bias.shape}"
                )
            stages.append((new_weight.astype(np.float64), new_bias.astype(np.float64)))

        self.stages = stages
        LOGGER.info("Loaded perceptual extractor weights from %s", path)

    def save(self: "PerceptualExtractor", path: Union[str, Path]) -> None:
        records = {}
        for i, (weight, bias) in enumerate(self.stages):
            records[f"stage{i}.weight"] = weight
            records[f"stage{i}.bias"] = bias
        write_container(path, records)

    def features(self: "PerceptualExtractor", image: Tensor, level: int) -> Tensor:
        """Activation after the ``level``-th pooling stage.

        Parameters
        ----------
        image : Tensor of shape (C, H, W) or (N, C, H, W), C in {1, 3}
        level : int
            One of 1, 2, 3, 4.

        Returns
        -------
        Tensor of shape (N, C_level, H / 2**level, W / 2**level), unbatched if the input is.
        """
        if level not in LEVELS:
            raise ValueError(f"Perceptual level must be one of {LEVELS}, got {level}")

        unbatched = image.ndim == 3
        x = image.reshape((1,) + image.shape) if unbatched else image

        if x.ndim != 4 or x.shape[1] not in (1, 3):
            raise ShapeMismatchError(
                f"Perceptual features need a 1- or 3-channel image, got shape {image.shape}"
            )

        if x.shape[1] == 1:
            x = concat([x, x, x], axis=1)

        for weight, bias in self.stages[:level]:
            w = Tensor(weight, dtype=x.dtype)
            b = Tensor(bias, dtype=x.dtype)
            x = avg_pool2d(relu(conv2d(x, w, b, padding=1)))

        return x.reshape(x.shape[1:]) if unbatched else x


def perceptual_features(extractor: PerceptualExtractor, image: Tensor, level: int) -> Tensor:
    return extractor.features(image, level)


def _mse(a: Tensor, b: Tensor) -> Tensor:
    diff = a - b
    return (diff * diff).mean()


def style_loss(
    extractor: PerceptualExtractor,
    fake: Tensor,
    real: Tensor,
    levels: Sequence[int] = (1, 2),
) -> Tensor:
    """Sum over shallow levels of the mean squared feature distance."""
    if fake.shape != real.shape:
        raise ShapeMismatchError(
            f"Style loss needs equal shapes, got {fake.shape} and {real.shape}"
        )

    total = None
    for level in levels:
        term = _mse(extractor.features(real, level), extractor.features(fake, level))
        total = term if total is None else total + term
    return total


def content_loss(
    extractor: PerceptualExtractor,
    reference: Tensor,
    fake: Tensor,
    level: int = 4,
) -> Tensor:
    """Mean squared distance of deep features of a reference image and the generated sketch.

    ``reference`` is the photo by default, its channel count may differ from ``fake``.
    """
    if reference.ndim != fake.ndim or reference.shape[-2:] != fake.shape[-2:]:
        raise ShapeMismatchError(
            f"Content loss needs equal spatial extents, got {reference.shape} and {fake.shape}"
        )
    if reference.ndim == 4 and reference.shape[0] != fake.shape[0]:
        raise ShapeMismatchError(
            f"Content loss needs equal batch sizes, got {reference.shape} and {fake.shape}"
        )

    return _mse(extractor.features(reference, level), extractor.features(fake, level))
