"""
Fidelity metrics on the BT.601 studio-range luminance plane, peak 255.
"""
import math

import numpy as np
from scipy.signal import convolve2d

from ..errors import DimensionError

Y_WEIGHTS = np.array([65.481, 128.553, 24.966])
Y_OFFSET = 16.0
PEAK = 255.0

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1, SSIM_K2 = 0.01, 0.03


def rgb_to_y(image: np.ndarray) -> np.ndarray:
    """
    ``Y = 65.481·R' + 128.553·G' + 24.966·B' + 16`` with ``R', G', B'`` in ``[0, 1]``,
    for a ``(h, w, 3)`` image on the 0-255 scale.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 3 or image.shape[-1] != 3:
        raise DimensionError(f'Expected a (h, w, 3) RGB image, but shape {image.shape!r} found.')
    return image @ Y_WEIGHTS / 255.0 + Y_OFFSET


def _luma(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image)
    return image.astype(np.float64) if image.ndim == 2 else rgb_to_y(image)


def _pair(a: np.ndarray, b: np.ndarray):
    ya, yb = _luma(a), _luma(b)
    if ya.shape != yb.shape:
        raise DimensionError(f'Images differ in size: {ya.shape!r} and {yb.shape!r}.')
    return ya, yb


def psnr_y(a: np.ndarray, b: np.ndarray) -> float:
    ya, yb = _pair(a, b)
    mse = float(np.mean((ya - yb) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / mse)


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    coords = np.arange(size) - (size - 1) / 2
    g = np.exp(-coords ** 2 / (2 * sigma * sigma))
    g /= g.sum()
    return np.outer(g, g)


def ssim_y(a: np.ndarray, b: np.ndarray) -> float:
    """
    Mean SSIM on the Y plane over every valid 11×11 Gaussian window (σ = 1.5).
    """
    ya, yb = _pair(a, b)
    if min(ya.shape) < SSIM_WINDOW:
        raise DimensionError(f'Image of size {ya.shape!r} is smaller than the {SSIM_WINDOW}×{SSIM_WINDOW} window.')
    c1 = (SSIM_K1 * PEAK) ** 2
    c2 = (SSIM_K2 * PEAK) ** 2
    window = gaussian_window()

    def _filter(x):
        return convolve2d(x, window, mode='valid')

    mu_a, mu_b = _filter(ya), _filter(yb)
    var_a = _filter(ya * ya) - mu_a ** 2
    var_b = _filter(yb * yb) - mu_b ** 2
    cov = _filter(ya * yb) - mu_a * mu_b
    ssim_map = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / ((mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2))
    return float(ssim_map.mean())
