"""Structural similarity and mean absolute error of images in [0, 1]."""
import numpy as np
from scipy.signal import convolve2d

from ..errors import ShapeMismatchError

WINDOW_SIZE = 11
WINDOW_SIGMA = 1.5
DYNAMIC_RANGE = 1.0
K1 = 0.01
K2 = 0.03


def gaussian_window(size: int = WINDOW_SIZE, sigma: float = WINDOW_SIGMA) -> np.ndarray:
    """Normalized 2-D Gaussian, equal to MATLAB's ``fspecial('gaussian', size, sigma)``."""
    radius = (size - 1) / 2.0
    y, x = np.mgrid[-radius : radius + 1, -radius : radius + 1]
    window = np.exp(-(x * x + y * y) / (2.0 * sigma * sigma))
    return window / window.sum()


def _as_planes(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 2:
        return image[np.newaxis]
    if image.ndim == 3:
        return image
    raise ShapeMismatchError(f"Expected an image of shape (C, H, W) or (H, W), got {image.shape}")


def _ssim_plane(a: np.ndarray, b: np.ndarray, window: np.ndarray) -> float:
    c1 = (K1 * DYNAMIC_RANGE) ** 2
    c2 = (K2 * DYNAMIC_RANGE) ** 2

    def filt(x: np.ndarray) -> np.ndarray:
        return convolve2d(x, window, mode="valid")

    mu_a = filt(a)
    mu_b = filt(b)
    var_a = filt(a * a) - mu_a * mu_a
    var_b = filt(b * b) - mu_b * mu_b
    cov = filt(a * b) - mu_a * mu_b

    numerator = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    denominator = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(numerator / denominator))


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean local SSIM over an 11x11 Gaussian window (sigma 1.5), averaged over channels.

    Parameters
    ----------
    a, b : np.ndarray of shape (C, H, W) or (H, W)
        Values in [0, 1], H and W at least 11.

    Returns
    -------
    float
        In [-1, 1], 1 for identical images.
    """
    planes_a = _as_planes(a)
    planes_b = _as_planes(b)

    if planes_a.shape != planes_b.shape:
        raise ShapeMismatchError(f"SSIM needs equal shapes, got {np.shape(a)} and {np.shape(b)}")

    h, w = planes_a.shape[1:]
    if h < WINDOW_SIZE or w < WINDOW_SIZE:
        raise ShapeMismatchError(
            f"SSIM needs images of at least {WINDOW_SIZE}x{WINDOW_SIZE}, got {h}x{w}"
        )

    window = gaussian_window()
    return float(np.mean([_ssim_plane(pa, pb, window) for pa, pb in zip(planes_a, planes_b)]))


def mean_l1(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"L1 needs equal shapes, got {a.shape} and {b.shape}")
    return float(np.mean(np.abs(a - b)))
