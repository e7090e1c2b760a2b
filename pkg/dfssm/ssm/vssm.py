from typing import Optional

import numpy as np

from .ss2d import SS2D
from ..tensor import Tensor, Module, Conv2d, DWConv2d, LayerNorm, silu, getitem
from ..tensor.layers import ELEMENTWISE_FLOPS_PER_ELEMENT

#: width multiplier of the inner scan path
DEFAULT_EXPAND = 2


class VSSM(Module):
    """
    Vision state space module.

    ``in_proj`` widens ``C → 2·E·C`` and splits into a main path
    (3×3 depth-wise conv, SiLU, :class:`SS2D`, layer norm) and a SiLU gate;
    their product is projected back to ``C``.
    """

    def __init__(self, channels: int, state_dim: int, rng: np.random.Generator,
                 expand: int = DEFAULT_EXPAND, chunk: Optional[int] = None):
        self.inner = expand * channels
        self.in_proj = Conv2d(channels, 2 * self.inner, 1, rng, bias=False)
        self.dwconv = DWConv2d(self.inner, 3, rng, bias=True)
        self.ss2d = SS2D(self.inner, state_dim, rng, chunk=chunk)
        self.norm = LayerNorm(self.inner)
        self.out_proj = Conv2d(self.inner, channels, 1, rng, bias=False)

    def forward(self, x: Tensor) -> Tensor:
        xz = self.in_proj(x)
        main = getitem(xz, (slice(None), slice(0, self.inner)))
        gate = getitem(xz, (slice(None), slice(self.inner, None)))
        main = self.norm(self.ss2d(silu(self.dwconv(main))))
        return self.out_proj(main * silu(gate))

    def flops(self, h: int, w: int) -> int:
        # two SiLU passes and the gating product
        return super().flops(h, w) + 3 * ELEMENTWISE_FLOPS_PER_ELEMENT * self.inner * h * w
