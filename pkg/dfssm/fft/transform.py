"""
Discrete Fourier transforms written out in numpy, plus the differentiable real 2D
pair :func:`rfft2` / :func:`irfft2` used by the network.

Forward transforms are unnormalized, inverse transforms carry the ``1/n`` factor.
Power-of-two lengths use an iterative radix-2 Cooley-Tukey pass, every other
length goes through Bluestein's chirp-z convolution.
"""
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from ..errors import DimensionError
from ..tensor import Tensor, make_result, concat, getitem

_COMPLEX = np.complex128


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def next_power_of_two(n: int) -> int:
    return 1 << max(n - 1, 0).bit_length()


@lru_cache(maxsize=64)
def _bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    rev.flags.writeable = False
    return rev


@lru_cache(maxsize=64)
def _twiddles(size: int) -> np.ndarray:
    out = np.exp(-2j * np.pi * np.arange(size // 2) / size)
    out.flags.writeable = False
    return out


def _fft_radix2(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    x = x[..., _bit_reversal(n)]
    lead = x.shape[:-1]
    size = 2
    while size <= n:
        half = size // 2
        blocks = x.reshape(*lead, n // size, size)
        even = blocks[..., :half]
        odd = blocks[..., half:] * _twiddles(size)
        x = np.concatenate([even + odd, even - odd], axis=-1).reshape(*lead, n)
        size *= 2
    return x


@lru_cache(maxsize=64)
def _chirp(n: int) -> Tuple[np.ndarray, np.ndarray, int]:
    # k² mod 2n keeps the phase argument small for long sequences
    k = np.arange(n)
    w = np.exp(-1j * np.pi * ((k * k) % (2 * n)) / n)
    m = next_power_of_two(2 * n - 1)
    b = np.zeros(m, dtype=_COMPLEX)
    b[:n] = np.conj(w)
    b[m - n + 1:] = np.conj(w[1:])[::-1]
    fb = _fft_radix2(b)
    w.flags.writeable = False
    fb.flags.writeable = False
    return w, fb, m


def _fft_bluestein(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    w, fb, m = _chirp(n)
    a = np.zeros((*x.shape[:-1], m), dtype=_COMPLEX)
    a[..., :n] = x * w
    conv = np.conj(_fft_radix2(np.conj(_fft_radix2(a) * fb))) / m
    return conv[..., :n] * w


def fft(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """
    Unnormalized complex DFT ``X_k = Σ x_j·exp(-2πi·jk/n)`` along ``axis``.
    """
    x = np.moveaxis(np.asarray(x, dtype=_COMPLEX), axis, -1)
    n = x.shape[-1]
    if n == 0:
        raise DimensionError('Cannot transform an empty axis.')
    if n == 1:
        out = x.copy()
    elif is_power_of_two(n):
        out = _fft_radix2(x)
    else:
        out = _fft_bluestein(x)
    return np.moveaxis(out, -1, axis)


def ifft(x: np.ndarray, axis: int = -1) -> np.ndarray:
    x = np.asarray(x, dtype=_COMPLEX)
    return np.conj(fft(np.conj(x), axis=axis)) / x.shape[axis]


def rfft(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """
    DFT of a real signal, keeping the ``n // 2 + 1`` non-redundant bins.

    Even lengths pack the samples into a half-length complex sequence, odd
    lengths fall back to the full complex transform.
    """
    x = np.moveaxis(np.asarray(x, dtype=np.float64), axis, -1)
    n = x.shape[-1]
    if n % 2 or n < 2:
        out = fft(x)[..., :n // 2 + 1]
    else:
        m = n // 2
        z = fft(x[..., 0::2] + 1j * x[..., 1::2])
        k = np.arange(m + 1)
        zk = z[..., k % m]
        zc = np.conj(z[..., (m - k) % m])
        even = (zk + zc) * 0.5
        odd = (zk - zc) * -0.5j
        out = even + np.exp(-2j * np.pi * k / n) * odd
    return np.moveaxis(out, -1, axis)


def hermitian_extend(x: np.ndarray, n: int, axis: int = -1) -> np.ndarray:
    x = np.moveaxis(np.asarray(x, dtype=_COMPLEX), axis, -1)
    if x.shape[-1] != n // 2 + 1:
        raise DimensionError(f'{x.shape[-1]!r} bins do not describe a real signal of length {n!r}.')
    full = np.concatenate([x, np.conj(x[..., 1:n - n // 2][..., ::-1])], axis=-1)
    return np.moveaxis(full, -1, axis)


def irfft(x: np.ndarray, n: int, axis: int = -1) -> np.ndarray:
    return ifft(hermitian_extend(x, n, axis), axis=axis).real


def fft2(x: np.ndarray) -> np.ndarray:
    return fft(fft(x, axis=-1), axis=-2)


def ifft2(x: np.ndarray) -> np.ndarray:
    return ifft(ifft(x, axis=-1), axis=-2)


def rfft2_array(x: np.ndarray) -> np.ndarray:
    return fft(rfft(x, axis=-1), axis=-2)


def irfft2_array(s: np.ndarray, shape: Tuple[int, int]) -> np.ndarray:
    h, w = shape
    if s.shape[-2] != h:
        raise DimensionError(f'Spectrum of {s.shape[-2]!r} rows does not match origin height {h!r}.')
    return irfft(ifft(s, axis=-2), w, axis=-1)


def column_weights(w: int) -> np.ndarray:
    c = np.full(w // 2 + 1, 2.0)
    c[0] = 1.0
    if w % 2 == 0:
        c[-1] = 1.0
    return c


@dataclass
class ComplexSpectrum:
    """
    Half-plane spectrum of a rank-4 tensor, stored as one packed tensor
    ``(n, 2c, h, w // 2 + 1)`` with the real parts in the first ``c`` channels and
    the imaginary parts in the last ``c``.
    """
    packed: Tensor
    origin_shape: Tuple[int, int]

    def __post_init__(self):
        if self.packed.ndim != 4 or self.packed.shape[1] % 2:
            raise DimensionError(f'Packed spectrum needs an even channel count, but shape '
                                 f'{self.packed.shape!r} found.')
        h, w = self.origin_shape
        if self.packed.shape[2:] != (h, w // 2 + 1):
            raise DimensionError(f'Spectrum bins {self.packed.shape[2:]!r} do not match origin shape '
                                 f'{self.origin_shape!r}.')

    @classmethod
    def from_parts(cls, re: Tensor, im: Tensor, origin_shape: Tuple[int, int]) -> 'ComplexSpectrum':
        if re.shape != im.shape:
            raise DimensionError(f'Real part {re.shape!r} and imaginary part {im.shape!r} differ.')
        return cls(concat([re, im], axis=1), tuple(origin_shape))

    @property
    def channels(self) -> int:
        return self.packed.shape[1] // 2

    @property
    def shape(self) -> Tuple[int, int, int, int]:
        n, _, h, wf = self.packed.shape
        return n, self.channels, h, wf

    @property
    def re(self) -> Tensor:
        return getitem(self.packed, (slice(None), slice(0, self.channels)))

    @property
    def im(self) -> Tensor:
        return getitem(self.packed, (slice(None), slice(self.channels, None)))

    def to_complex(self) -> np.ndarray:
        c = self.channels
        return self.packed.data[:, :c] + 1j * self.packed.data[:, c:]


def rfft2(x: Tensor) -> ComplexSpectrum:
    """
    Differentiable real 2D FFT of ``(n, c, h, w)``, unnormalized.
    """
    if x.ndim != 4:
        raise DimensionError(f'rfft2 expects a rank-4 tensor, but shape {x.shape!r} found.')
    n, c, h, w = x.shape
    if h < 1 or w < 1:
        raise DimensionError(f'Cannot transform an empty plane of shape {x.shape!r}.')
    spec = rfft2_array(x.data)
    packed = np.concatenate([spec.real, spec.imag], axis=1).astype(x.dtype)

    def _backward(g):
        gs = np.zeros((n, c, h, w), dtype=_COMPLEX)
        gs[..., :w // 2 + 1] = g[:, :c] + 1j * g[:, c:]
        return (ifft2(gs).real * (h * w)).astype(x.dtype),

    return ComplexSpectrum(make_result(packed, (x,), _backward, 'rfft2'), (h, w))


def irfft2(s: ComplexSpectrum) -> Tensor:
    """
    Differentiable inverse of :func:`rfft2`, normalized by ``1/(h·w)``.
    """
    h, w = s.origin_shape
    c = s.channels
    packed = s.packed
    out = irfft2_array(s.to_complex(), (h, w)).astype(packed.dtype)
    weights = column_weights(w) / (h * w)

    def _backward(g):
        gs = rfft2_array(g) * weights
        return np.concatenate([gs.real, gs.imag], axis=1).astype(packed.dtype),

    return make_result(out, (packed,), _backward, 'irfft2')


def fft_flops(h: int, w: int) -> int:
    size = h * w
    return int(round(5 * size * math.log2(size))) if size > 1 else 0
