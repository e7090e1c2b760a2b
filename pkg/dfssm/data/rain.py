"""
Deterministic synthetic rain.

A sparse Bernoulli impulse field is smeared with an oriented, anti-aliased line
kernel, scaled and added to the clean image in ``[0, 1]`` space. The streak angle
is measured in degrees from the vertical, positive angles leaning the top of the
streak to the left, i.e. a streak runs along ``(x, y) = (sin θ, cos θ)`` with ``y``
pointing down.
"""
import math
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np
from scipy.signal import convolve2d

from ..errors import ConfigError

THETA_RANGE = (-90.0, 90.0)
LENGTH_RANGE = (1, 256)
INTENSITY_RANGE = (0.0, 4.0)
AMPLITUDE_RANGE = (0.5, 1.0)
#: samples splatted per pixel of streak length
SUPERSAMPLE = 4


@dataclass(frozen=True)
class RainParams:
    theta: float = 0.0
    length: int = 15
    rho: float = 0.01
    intensity: float = 0.6
    seed: int = 0

    def validate(self) -> 'RainParams':
        if not THETA_RANGE[0] <= self.theta <= THETA_RANGE[1]:
            raise ConfigError(f'Streak angle must be within {THETA_RANGE!r} degrees, but {self.theta!r} found.')
        if not LENGTH_RANGE[0] <= self.length <= LENGTH_RANGE[1]:
            raise ConfigError(f'Streak length must be within {LENGTH_RANGE!r}, but {self.length!r} found.')
        if not 0.0 < self.rho < 1.0:
            raise ConfigError(f'Density must be within (0, 1), but {self.rho!r} found.')
        if not INTENSITY_RANGE[0] <= self.intensity <= INTENSITY_RANGE[1]:
            raise ConfigError(f'Intensity must be within {INTENSITY_RANGE!r}, but {self.intensity!r} found.')
        if self.seed < 0:
            raise ConfigError(f'Seed must be non-negative, but {self.seed!r} found.')
        return self

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ImagePair:
    rainy: np.ndarray
    clean: np.ndarray
    meta: Optional[RainParams] = None
    name: Optional[str] = None

    def __post_init__(self):
        assert self.rainy.shape == self.clean.shape, \
            f'Rainy {self.rainy.shape!r} and clean {self.clean.shape!r} images differ in size.'


def line_kernel(length: int, theta: float) -> np.ndarray:
    """
    Odd-sized kernel holding a centred line of ``length`` pixels at ``theta``,
    bilinearly splatted and scaled to a peak of 1.
    """
    size = 2 * (int(math.ceil(length / 2)) + 1) + 1
    c = size // 2
    kernel = np.zeros((size, size), dtype=np.float64)
    rad = math.radians(theta)
    dx, dy = math.sin(rad), math.cos(rad)

    count = max(int(length) * SUPERSAMPLE, 1)
    ts = (np.arange(count) + 0.5) / count * length - length / 2 if length > 1 else np.zeros(1)
    xs, ys = c + ts * dx, c + ts * dy
    x0, y0 = np.floor(xs).astype(int), np.floor(ys).astype(int)
    fx, fy = xs - x0, ys - y0
    for ox, oy, wt in ((0, 0, (1 - fx) * (1 - fy)), (1, 0, fx * (1 - fy)),
                       (0, 1, (1 - fx) * fy), (1, 1, fx * fy)):
        np.add.at(kernel, (y0 + oy, x0 + ox), wt)
    return kernel / kernel.max()


def rain_layer(h: int, w: int, params: RainParams) -> np.ndarray:
    rng = np.random.default_rng(params.seed)
    impulses = rng.random((h, w)) < params.rho
    amplitudes = rng.uniform(*AMPLITUDE_RANGE, size=(h, w))
    field = np.where(impulses, amplitudes, 0.0)
    layer = convolve2d(field, line_kernel(params.length, params.theta), mode='same', boundary='wrap')
    return layer * params.intensity


def synth_rain(clean: np.ndarray, params: RainParams, name: Optional[str] = None) -> ImagePair:
    params.validate()
    h, w = clean.shape[:2]
    layer = rain_layer(h, w, params)
    rainy = np.clip(clean.astype(np.float64) / 255.0 + layer[..., None], 0.0, 1.0)
    rainy = np.rint(rainy * 255.0).astype(np.uint8)
    return ImagePair(rainy=rainy, clean=clean.copy(), meta=params, name=name)
