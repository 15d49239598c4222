"""Deterministic synthetic photo/sketch pairs.

A photo is a shaded composition of 2 to 5 filled shapes over a gradient background with mild
noise. Its sketch is the anti-aliased contour drawing of the same shapes on white, where a
contour is hidden wherever a later shape covers it.
"""
import logging
from typing import Tuple

import numpy as np

from ..errors import ConfigError
from .dataset import Dataset, ImagePair
from .shapes import ShapeFactory, contour_coverage, fill_coverage

LOGGER = logging.getLogger(__name__)

MIN_SIZE = 16
SHAPE_COUNT = (2, 5)
NOISE_STD = 0.02
STROKE_WIDTH = 1.0


def _grid(size: int) -> Tuple[np.ndarray, np.ndarray]:
    y, x = np.mgrid[0:size, 0:size].astype(np.float64) + 0.5
    return x, y


def _ramp(x: np.ndarray, y: np.ndarray, angle: float) -> np.ndarray:
    """Linear ramp in [0, 1] along ``angle``."""
    r = x * np.cos(angle) + y * np.sin(angle)
    return (r - r.min()) / max(np.ptp(r), 1.0e-12)


def gen_synthetic_pair(index: int, size: int, seed: int) -> ImagePair:
    """Render pair ``index``, it depends on ``(seed, index)`` only."""
    rng = np.random.default_rng([seed, index])
    factory = ShapeFactory()
    x, y = _grid(size)

    colors = rng.uniform(0.2, 0.8, size=(2, 3))
    t = _ramp(x, y, rng.uniform(0.0, 2.0 * np.pi))
    photo = colors[0][:, None, None] * (1.0 - t) + colors[1][:, None, None] * t

    ink = np.zeros((size, size))
    count = rng.integers(SHAPE_COUNT[0], SHAPE_COUNT[1] + 1)

    for _ in range(count):
        shape = factory.create_random(rng, size)
        sdf = shape.signed_distance(x, y)
        fill = fill_coverage(sdf)

        color = rng.uniform(0.0, 1.0, size=3)
        shading = 0.75 + 0.5 * _ramp(x, y, rng.uniform(0.0, 2.0 * np.pi))
        shaded = np.clip(color[:, None, None] * shading, 0.0, 1.0)
        photo = photo * (1.0 - fill) + shaded * fill

        ink = np.maximum(ink * (1.0 - fill), contour_coverage(sdf, STROKE_WIDTH))

    photo = np.clip(photo + rng.normal(0.0, NOISE_STD, size=photo.shape), 0.0, 1.0)
    sketch = (1.0 - ink)[np.newaxis]

    return ImagePair(photo=photo, sketch=sketch, name=f"{index:05d}")


def gen_synthetic_pairs(n: int, size: int, seed: int) -> Dataset:
    """Generate ``n`` pairs of ``size`` x ``size`` pixels.

    Parameters
    ----------
    n : int
        At least 1.
    size : int
        At least 16.
    seed : int

    Returns
    -------
    Dataset
    """
    if n < 1:
        raise ConfigError(f"Number of pairs must be >= 1, got {n}")
    if size < MIN_SIZE:
        raise ConfigError(f"Image size must be >= {MIN_SIZE}, got {size}")

    LOGGER.info("Generating %i synthetic pairs of size %i with seed %i", n, size, seed)
    return Dataset((gen_synthetic_pair(i, size, seed) for i in range(n)), seed=seed)
