from typing import Optional

import numpy as np

from ..tensor import Tensor, Module, Conv2d, global_avg_pool, relu, sigmoid

#: squeeze-excitation reduction, capped by the channel count for narrow blocks
DEFAULT_REDUCTION = 16


def bottleneck_width(channels: int, reduction: Optional[int] = None) -> int:
    r = reduction if reduction is not None else min(DEFAULT_REDUCTION, channels)
    if r < 1:
        raise ValueError(f'Reduction must be positive, but {r!r} found.')
    return max(channels // r, 1)


class ChannelAttention(Module):
    def __init__(self, channels: int, rng: np.random.Generator, reduction: Optional[int] = None):
        hidden = bottleneck_width(channels, reduction)
        self.squeeze = Conv2d(channels, hidden, 1, rng, bias=True)
        self.excite = Conv2d(hidden, channels, 1, rng, bias=True)

    def weights(self, x: Tensor) -> Tensor:
        return sigmoid(self.excite(relu(self.squeeze(global_avg_pool(x)))))

    def forward(self, x: Tensor) -> Tensor:
        return x * self.weights(x)

    def flops(self, h: int, w: int) -> int:
        c = self.squeeze.in_channels
        # pooling and rescaling touch every element, the bottleneck runs on 1×1
        return 2 * c * h * w + self.squeeze.flops(1, 1) + self.excite.flops(1, 1)
