"""
State space blocks.

* :class:`SSB` -- ``VSSM(LN(x)) + s·x``
* :class:`FSSB` -- ``VSSM(LN(x)) + FFTM(LN(x)) + s·x``, both branches reading the same
  normalized tensor
"""
from typing import Optional

import numpy as np

from .fftm import FFTM
from ..ssm import VSSM, DEFAULT_EXPAND
from ..tensor import Tensor, Module, LayerNorm, Scale


class SSB(Module):
    def __init__(self, channels: int, state_dim: int, rng: np.random.Generator,
                 expand: int = DEFAULT_EXPAND, chunk: Optional[int] = None):
        self.norm = LayerNorm(channels)
        self.vssm = VSSM(channels, state_dim, rng, expand=expand, chunk=chunk)
        self.scale = Scale(channels)

    def forward(self, x: Tensor) -> Tensor:
        return self.vssm(self.norm(x)) + self.scale(x)


class FSSB(Module):
    def __init__(self, channels: int, state_dim: int, rng: np.random.Generator,
                 expand: int = DEFAULT_EXPAND, chunk: Optional[int] = None,
                 fftm_use_fft: bool = True, fftm_spatial_convs: bool = True):
        self.norm = LayerNorm(channels)
        self.vssm = VSSM(channels, state_dim, rng, expand=expand, chunk=chunk)
        self.fftm = FFTM(channels, rng, use_fft=fftm_use_fft, spatial_convs=fftm_spatial_convs)
        self.scale = Scale(channels)

    def forward(self, x: Tensor) -> Tensor:
        normed = self.norm(x)
        return (self.vssm(normed) + self.fftm(normed)) + self.scale(x)
