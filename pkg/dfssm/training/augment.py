from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..errors import DimensionError


@dataclass(frozen=True)
class AugmentDecision:
    top: int
    left: int
    size: int
    hflip: bool
    vflip: bool


def sample_augment(rng: np.random.Generator, h: int, w: int, patch_size: int) -> AugmentDecision:
    if patch_size > h or patch_size > w:
        raise DimensionError(f'Patch size {patch_size!r} exceeds image size {(h, w)!r}.')
    top = int(rng.integers(0, h - patch_size + 1))
    left = int(rng.integers(0, w - patch_size + 1))
    hflip, vflip = (bool(v) for v in rng.random(2) < 0.5)
    return AugmentDecision(top, left, patch_size, hflip, vflip)


def apply_augment(image: np.ndarray, decision: AugmentDecision) -> np.ndarray:
    out = image[..., decision.top:decision.top + decision.size, decision.left:decision.left + decision.size]
    if decision.hflip:
        out = out[..., :, ::-1]
    if decision.vflip:
        out = out[..., ::-1, :]
    return np.ascontiguousarray(out)


def flip(image: np.ndarray, decision: AugmentDecision) -> np.ndarray:
    out = image[..., :, ::-1] if decision.hflip else image
    out = out[..., ::-1, :] if decision.vflip else out
    return np.ascontiguousarray(out)


def augment(pair: Tuple[np.ndarray, np.ndarray], rng: np.random.Generator, patch_size: int) \
        -> Tuple[np.ndarray, np.ndarray]:
    """
    Random crop with horizontal and vertical flips, identical for both images.
    """
    rainy, clean = pair
    if rainy.shape != clean.shape:
        raise DimensionError(f'Pair images differ in shape: {rainy.shape!r} and {clean.shape!r}.')
    decision = sample_augment(rng, rainy.shape[-2], rainy.shape[-1], patch_size)
    return apply_augment(rainy, decision), apply_augment(clean, decision)
