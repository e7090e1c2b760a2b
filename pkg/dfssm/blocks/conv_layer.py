import numpy as np

from .attention import ChannelAttention
from ..tensor import Tensor, Module, Conv2d, LayerNorm, Scale, gelu


class ConvLayer(Module):
    def __init__(self, channels: int, rng: np.random.Generator):
        self.norm = LayerNorm(channels)
        self.conv1 = Conv2d(channels, channels, 3, rng, bias=True)
        self.conv2 = Conv2d(channels, channels, 3, rng, bias=True)
        self.attention = ChannelAttention(channels, rng)
        self.scale = Scale(channels)

    def forward(self, x: Tensor) -> Tensor:
        y = self.conv2(gelu(self.conv1(self.norm(x))))
        return self.attention(y) + self.scale(x)
