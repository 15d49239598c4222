"""Image grids for eyeballing training progress."""
from pathlib import Path
from typing import Union

import numpy as np

from ..data.png import to_rgb, write_png
from ..errors import ShapeMismatchError

PADDING = 2


def sample_grid(photos: np.ndarray, fakes: np.ndarray, reals: np.ndarray) -> np.ndarray:
    """Arrange a batch into three rows: photos, generated sketches and reference sketches.

    Parameters
    ----------
    photos : np.ndarray of shape (N, 3, H, W)
    fakes, reals : np.ndarray of shape (N, 1, H, W)
        All values in [0, 1].

    Returns
    -------
    np.ndarray of shape (3, 3 * H + 4 * PADDING, N * W + (N + 1) * PADDING)
        White background between tiles.
    """
    if not photos.shape[0] == fakes.shape[0] == reals.shape[0]:
        raise ShapeMismatchError(
            f"Rows have different lengths: {photos.shape}, {fakes.shape}, {reals.shape}"
        )

    n, _, h, w = photos.shape
    grid = np.ones((3, 3 * h + 4 * PADDING, n * w + (n + 1) * PADDING))

    for row, images in enumerate((photos, fakes, reals)):
        top = PADDING + row * (h + PADDING)
        for col, image in enumerate(images):
            left = PADDING + col * (w + PADDING)
            grid[:, top : top + h, left : left + w] = to_rgb(image)

    return grid


def save_sample_grid(
    photos: np.ndarray,
    fakes: np.ndarray,
    reals: np.ndarray,
    path: Union[str, Path],
) -> None:
    write_png(path, np.clip(sample_grid(photos, fakes, reals), 0.0, 1.0))
