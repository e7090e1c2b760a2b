import math
from typing import Optional

import numpy as np

from .module import Module
from .nn import conv2d, dwconv2d, layer_norm, PaddingLike
from .tensor import Parameter, Tensor, get_default_dtype

# per-element cost charged for normalization and activation passes
NORM_FLOPS_PER_ELEMENT = 5
ELEMENTWISE_FLOPS_PER_ELEMENT = 1


def uniform_init(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    bound = 1.0 / math.sqrt(max(fan_in, 1))
    return rng.uniform(-bound, bound, size=shape).astype(get_default_dtype())


class Conv2d(Module):
    def __init__(self, in_channels: int, out_channels: int, kernel_size: int, rng: np.random.Generator,
                 bias: bool = True, padding: PaddingLike = None):
        fan_in = in_channels * kernel_size * kernel_size
        self.weight = Parameter(uniform_init(rng, (out_channels, in_channels, kernel_size, kernel_size), fan_in))
        self.bias = Parameter(uniform_init(rng, (out_channels,), fan_in), decay=False) if bias else None
        self.padding = padding

    @property
    def in_channels(self) -> int:
        return self.weight.shape[1]

    @property
    def out_channels(self) -> int:
        return self.weight.shape[0]

    def forward(self, x: Tensor) -> Tensor:
        return conv2d(x, self.weight, self.bias, padding=self.padding)

    def flops(self, h: int, w: int) -> int:
        co, ci, kh, kw = self.weight.shape
        return h * w * co * ci * kh * kw


class DWConv2d(Module):
    def __init__(self, channels: int, kernel_size: int, rng: np.random.Generator, bias: bool = True):
        fan_in = kernel_size * kernel_size
        self.weight = Parameter(uniform_init(rng, (channels, 1, kernel_size, kernel_size), fan_in))
        self.bias = Parameter(uniform_init(rng, (channels,), fan_in), decay=False) if bias else None

    def forward(self, x: Tensor) -> Tensor:
        return dwconv2d(x, self.weight, self.bias)

    def flops(self, h: int, w: int) -> int:
        c, _, kh, kw = self.weight.shape
        return h * w * c * kh * kw


class LayerNorm(Module):
    def __init__(self, channels: int, eps: float = 1e-6):
        dtype = get_default_dtype()
        self.gamma = Parameter(np.ones(channels, dtype=dtype), decay=False)
        self.beta = Parameter(np.zeros(channels, dtype=dtype), decay=False)
        self.eps = eps

    def forward(self, x: Tensor) -> Tensor:
        return layer_norm(x, self.gamma, self.beta, self.eps)

    def flops(self, h: int, w: int) -> int:
        return NORM_FLOPS_PER_ELEMENT * self.gamma.size * h * w


class Scale(Module):
    def __init__(self, channels: int, value: float = 1.0):
        self.scale = Parameter(np.full(channels, value, dtype=get_default_dtype()), decay=False)

    def forward(self, x: Tensor) -> Tensor:
        return x * self.scale.reshape(1, -1, 1, 1)

    def flops(self, h: int, w: int) -> int:
        return ELEMENTWISE_FLOPS_PER_ELEMENT * self.scale.size * h * w


def zero_(param: Optional[Parameter]):
    if param is not None:
        param.data[...] = 0
