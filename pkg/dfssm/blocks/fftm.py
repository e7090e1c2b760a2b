import numpy as np

from ..errors import ConfigError
from ..fft import rfft2, irfft2, ComplexSpectrum, fft_flops
from ..tensor import Tensor, Module, Conv2d, silu
from ..tensor.layers import ELEMENTWISE_FLOPS_PER_ELEMENT


class FFTM(Module):
    """
    Fast Fourier transform module.

    Halves the channels with a 1×1 conv + SiLU, moves to the half-plane spectrum,
    mixes the stacked real/imaginary channels with a 1×1 conv + SiLU, returns to the
    spatial domain and restores the channel count with a 1×1 conv.

    ``use_fft=False`` keeps the middle conv + SiLU in the spatial domain, and
    ``spatial_convs=False`` drops the halving and restoring convs.
    """

    def __init__(self, channels: int, rng: np.random.Generator, use_fft: bool = True, spatial_convs: bool = True):
        if spatial_convs and channels % 2:
            raise ConfigError(f'FFTM halves its channels, but channel count {channels!r} is odd.')
        self.channels = channels
        self.use_fft = use_fft
        self.spatial_convs = spatial_convs
        self.hidden = channels // 2 if spatial_convs else channels

        if spatial_convs:
            self.reduce = Conv2d(channels, self.hidden, 1, rng, bias=True)
        freq_width = 2 * self.hidden if use_fft else self.hidden
        self.freq_conv = Conv2d(freq_width, freq_width, 1, rng, bias=True)
        if spatial_convs:
            self.expand = Conv2d(self.hidden, channels, 1, rng, bias=True)

    def forward(self, z: Tensor) -> Tensor:
        if self.spatial_convs:
            z = silu(self.reduce(z))
        if self.use_fft:
            spectrum = rfft2(z)
            mixed = silu(self.freq_conv(spectrum.packed))
            z = irfft2(ComplexSpectrum(mixed, spectrum.origin_shape))
        else:
            z = silu(self.freq_conv(z))
        if self.spatial_convs:
            z = self.expand(z)
        return z

    def flops(self, h: int, w: int) -> int:
        total = 0
        if self.spatial_convs:
            total += self.reduce.flops(h, w) + self.expand.flops(h, w)
            total += ELEMENTWISE_FLOPS_PER_ELEMENT * self.hidden * h * w
        if self.use_fft:
            wf = w // 2 + 1
            total += 2 * self.hidden * fft_flops(h, w)
            total += self.freq_conv.flops(h, wf) + ELEMENTWISE_FLOPS_PER_ELEMENT * 2 * self.hidden * h * wf
        else:
            total += self.freq_conv.flops(h, w) + ELEMENTWISE_FLOPS_PER_ELEMENT * self.hidden * h * w
        return total
