from typing import Optional

import numpy as np

from .conv_layer import ConvLayer
from .mgcb import MGCB, DEFAULT_GAMMA
from .ssb import SSB, FSSB
from ..config import CONV_BLOCKS
from ..ssm import DEFAULT_EXPAND
from ..tensor import Tensor, Module


class StateSpaceGroup(Module):
    def __init__(self, channels: int, state_dim: int, rng: np.random.Generator, frequency: bool = False,
                 expand: int = DEFAULT_EXPAND, gamma: float = DEFAULT_GAMMA, conv_block: str = 'mgcb',
                 fftm_use_fft: bool = True, fftm_spatial_convs: bool = True, chunk: Optional[int] = None):
        assert conv_block in CONV_BLOCKS, f'Unknown conv block {conv_block!r}, one of {CONV_BLOCKS!r} expected.'
        self.frequency = frequency
        self.conv_block = conv_block
        if frequency:
            self.fssb = FSSB(channels, state_dim, rng, expand=expand, chunk=chunk,
                             fftm_use_fft=fftm_use_fft, fftm_spatial_convs=fftm_spatial_convs)
        else:
            self.ssb = SSB(channels, state_dim, rng, expand=expand, chunk=chunk)
        if conv_block == 'mgcb':
            self.mgcb = MGCB(channels, rng, gamma=gamma)
        else:
            self.conv_layer = ConvLayer(channels, rng)

    @property
    def kind(self) -> str:
        return 'fssg' if self.frequency else 'ssg'

    @property
    def state_block(self) -> Module:
        return self.fssb if self.frequency else self.ssb

    @property
    def conv(self) -> Module:
        return self.mgcb if self.conv_block == 'mgcb' else self.conv_layer

    def forward(self, x: Tensor) -> Tensor:
        return self.conv(self.state_block(x))
