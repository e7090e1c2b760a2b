from typing import Tuple

import numpy as np

from .attention import ChannelAttention
from ..errors import ConfigError
from ..tensor import Tensor, Module, Conv2d, DWConv2d, LayerNorm, Scale, gelu, concat
from ..tensor.layers import ELEMENTWISE_FLOPS_PER_ELEMENT

#: default expansion rate of the gate branch
DEFAULT_GAMMA = 2.0


def expanded_width(channels: int, gamma: float) -> int:
    width = gamma * channels
    if width != int(width) or int(width) % 2 or width <= 0:
        raise ConfigError(f'Gated width γ·C = {gamma!r}·{channels!r} must be a positive even integer.')
    return int(width)


class MGCB(Module):
    """
    Mixed-scale gated-convolutional block.

    After a layer norm, three branches read the input: a GELU gate of width ``γC``
    (1×1 conv, 3×3 depth-wise conv) and two ``γC/2`` branches with 3×3 and 5×5
    depth-wise convs. The concatenated ``[3×3, 5×5]`` features are gated, projected
    back to ``C``, passed through channel attention and added to ``s·x``.
    All convs are bias-free, so a zero gate leaves exactly ``s·x``.
    """

    def __init__(self, channels: int, rng: np.random.Generator, gamma: float = DEFAULT_GAMMA):
        self.hidden = expanded_width(channels, gamma)
        half = self.hidden // 2
        self.norm = LayerNorm(channels)
        self.gate_proj = Conv2d(channels, self.hidden, 1, rng, bias=False)
        self.gate_dw = DWConv2d(self.hidden, 3, rng, bias=False)
        self.proj3 = Conv2d(channels, half, 1, rng, bias=False)
        self.dw3 = DWConv2d(half, 3, rng, bias=False)
        self.proj5 = Conv2d(channels, half, 1, rng, bias=False)
        self.dw5 = DWConv2d(half, 5, rng, bias=False)
        self.out_proj = Conv2d(self.hidden, channels, 1, rng, bias=False)
        self.attention = ChannelAttention(channels, rng)
        self.scale = Scale(channels)

    def branches(self, x: Tensor) -> Tuple[Tensor, Tensor]:
        normed = self.norm(x)
        gate = gelu(self.gate_dw(self.gate_proj(normed)))
        mixed = concat([self.dw3(self.proj3(normed)), self.dw5(self.proj5(normed))], axis=1)
        return gate, mixed

    def forward(self, x: Tensor) -> Tensor:
        gate, mixed = self.branches(x)
        return self.attention(self.out_proj(gate * mixed)) + self.scale(x)

    def flops(self, h: int, w: int) -> int:
        # GELU and the gating product
        return super().flops(h, w) + 2 * ELEMENTWISE_FLOPS_PER_ELEMENT * self.hidden * h * w
