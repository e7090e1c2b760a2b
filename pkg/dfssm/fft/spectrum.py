from typing import Tuple, Union

import numpy as np

from .transform import fft2
from ..errors import DimensionError
from ..tensor import Tensor

#: BT.601 luma weights, rescaled to sum to one
GRAY_WEIGHTS = np.array([65.481, 128.553, 24.966]) / 219.0

ArrayLike = Union[Tensor, np.ndarray]


def _as_plane(x: ArrayLike) -> np.ndarray:
    data = x.data if isinstance(x, Tensor) else np.asarray(x)
    data = data.astype(np.float64)
    if data.ndim == 4:
        if data.shape[0] != 1:
            raise DimensionError(f'Expected a single image, but batch of {data.shape[0]!r} found.')
        data = data[0]
    if data.ndim == 3:
        if data.shape[0] == 3:
            data = np.tensordot(GRAY_WEIGHTS, data, axes=(0, 0))
        elif data.shape[0] == 1:
            data = data[0]
        else:
            raise DimensionError(f'Expected 1 or 3 channels, but shape {data.shape!r} found.')
    if data.ndim != 2:
        raise DimensionError(f'Cannot interpret shape {data.shape!r} as an image plane.')
    return data


def center_shift(plane: np.ndarray) -> np.ndarray:
    h, w = plane.shape[-2:]
    return np.roll(plane, (h // 2, w // 2), axis=(-2, -1))


def amplitude_spectrum(x: ArrayLike) -> np.ndarray:
    return np.abs(fft2(_as_plane(x)))


def spectrum_image(x: ArrayLike, shift: bool = True) -> Tensor:
    """
    Renderable log-amplitude spectrum of a single image.

    :param x: Image ``(1, c, h, w)``, ``(c, h, w)`` or ``(h, w)`` with ``c`` of 1 or 3.
    :param shift: Put the DC bin at the centre.
    :returns: Tensor ``(1, 1, h, w)`` of ``log(1 + |F|)`` min-max scaled into ``[0, 1]``.
    """
    amp = np.log1p(amplitude_spectrum(x))
    if shift:
        amp = center_shift(amp)
    lo, hi = amp.min(), amp.max()
    if hi > lo:
        amp = (amp - lo) / (hi - lo)
    else:
        amp = np.zeros_like(amp)
    return Tensor(amp[None, None].astype(np.float32))


def frequency_grid(h: int, w: int) -> Tuple[np.ndarray, np.ndarray]:
    ky = (np.arange(h) + h // 2) % h - h // 2
    kx = (np.arange(w) + w // 2) % w - w // 2
    return np.meshgrid(ky, kx, indexing='ij')


def angular_energy_histogram(x: ArrayLike, bins: int = 36, exclude_radius: float = 2.0) \
        -> Tuple[np.ndarray, np.ndarray]:
    """
    Spectral energy of ``x`` binned by the orientation of the frequency vector.

    Orientation is measured in degrees from the vertical axis, in ``[0, 180)``, with a
    vertical streak pattern putting its energy around 90°. Only bins inside the disc
    inscribed in the frequency plane count, and those within ``exclude_radius`` of DC
    are dropped.

    :returns: ``(energy, centers)``, each of length ``bins``.
    """
    plane = _as_plane(x)
    h, w = plane.shape
    energy = np.abs(fft2(plane - plane.mean())) ** 2
    ky, kx = frequency_grid(h, w)
    fy, fx = ky / h, kx / w
    radius = np.hypot(ky * (min(h, w) / h), kx * (min(h, w) / w))
    keep = (radius > exclude_radius) & (np.hypot(fy, fx) <= 0.5)
    angle = np.degrees(np.arctan2(fx, fy)) % 180.0

    hist, edges = np.histogram(angle[keep], bins=bins, range=(0.0, 180.0), weights=energy[keep])
    return hist, (edges[:-1] + edges[1:]) / 2


def dominant_orientation(x: ArrayLike, bins: int = 36, exclude_radius: float = 2.0) -> float:
    """
    Centre of the strongest bin of :func:`angular_energy_histogram`, in degrees.
    """
    hist, centers = angular_energy_histogram(x, bins, exclude_radius)
    return float(centers[int(np.argmax(hist))])


def angular_distance(a: float, b: float) -> float:
    d = abs(a - b) % 180.0
    return min(d, 180.0 - d)
