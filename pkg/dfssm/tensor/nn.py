from typing import Optional, Union

import numpy as np

from .ops import PaddingSpec, pad2d, reshape, transpose, mean
from .tensor import Tensor, make_result
from ..errors import DimensionError

PaddingLike = Union[None, int, PaddingSpec]


def _resolve_padding(padding: PaddingLike, kernel_size: int) -> PaddingSpec:
    if padding is None:
        return PaddingSpec.same(kernel_size)
    elif isinstance(padding, int):
        return PaddingSpec.symmetric(padding)
    else:
        return padding


def _check_rank4(x: Tensor, op: str):
    if x.ndim != 4:
        raise DimensionError(f'{op} expects a rank-4 (n, c, h, w) tensor, but shape {x.shape!r} found.')


def _output_size(size: int, kernel: int, stride: int) -> int:
    out = (size - kernel) // stride + 1
    if out <= 0:
        raise DimensionError(f'Kernel {kernel!r} does not fit into padded size {size!r}.')
    return out


def _window(xp: np.ndarray, i: int, j: int, ho: int, wo: int, stride: int):
    return xp[:, :, i:i + stride * (ho - 1) + 1:stride, j:j + stride * (wo - 1) + 1:stride]


def _conv2d_valid(x: Tensor, weight: Tensor, bias: Optional[Tensor], stride: int) -> Tensor:
    n, ci, h, w = x.shape
    co, wci, kh, kw = weight.shape
    ho, wo = _output_size(h, kh, stride), _output_size(w, kw, stride)
    xd, wd = x.data, weight.data

    if kh == kw == 1 and stride == 1:
        out = np.einsum('nchw,oc->nohw', xd, wd[:, :, 0, 0], optimize=True)
    else:
        out = np.zeros((n, co, ho, wo), dtype=xd.dtype)
        for i in range(kh):
            for j in range(kw):
                out += np.einsum('nchw,oc->nohw', _window(xd, i, j, ho, wo, stride), wd[:, :, i, j], optimize=True)
    if bias is not None:
        out += bias.data[None, :, None, None]

    def _backward(g):
        gx = np.zeros_like(xd) if x.requires_grad else None
        gw = np.zeros_like(wd) if weight.requires_grad else None
        for i in range(kh):
            for j in range(kw):
                if gw is not None:
                    gw[:, :, i, j] = np.einsum('nohw,nchw->oc', g, _window(xd, i, j, ho, wo, stride), optimize=True)
                if gx is not None:
                    _window(gx, i, j, ho, wo, stride)[...] += \
                        np.einsum('nohw,oc->nchw', g, wd[:, :, i, j], optimize=True)
        gb = g.sum(axis=(0, 2, 3)) if bias is not None and bias.requires_grad else None
        return (gx, gw, gb) if bias is not None else (gx, gw)

    parents = (x, weight, bias) if bias is not None else (x, weight)
    return make_result(out, parents, _backward, 'conv2d')


def conv2d(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None,
           stride: int = 1, padding: PaddingLike = None) -> Tensor:
    """
    Dense 2D cross-correlation.

    :param x: Input of shape ``(n, ci, h, w)``.
    :param weight: Kernel of shape ``(co, ci, kh, kw)``.
    :param bias: Optional bias of shape ``(co,)``.
    :param stride: Spatial stride.
    :param padding: ``None`` for zero "same" padding ``k // 2``, an int for symmetric
        zero padding, or an explicit :class:`PaddingSpec` (zero or reflect).
    :returns: Tensor of shape ``(n, co, (h + 2p - kh) // stride + 1, ...)``.
    """
    _check_rank4(x, 'conv2d')
    if weight.ndim != 4 or weight.shape[1] != x.shape[1]:
        raise DimensionError(f'Kernel shape {weight.shape!r} does not match input channels of {x.shape!r}.')
    if bias is not None and bias.shape != (weight.shape[0],):
        raise DimensionError(f'Bias shape {bias.shape!r} does not match {weight.shape[0]!r} output channels.')
    if weight.shape[2] != weight.shape[3] and padding is None:
        raise DimensionError(f'Same padding needs a square kernel, but {weight.shape[2:]!r} found.')
    return _conv2d_valid(pad2d(x, _resolve_padding(padding, weight.shape[2])), weight, bias, stride)


def dwconv2d(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None, padding: PaddingLike = None) -> Tensor:
    _check_rank4(x, 'dwconv2d')
    if weight.ndim != 4 or weight.shape[0] != x.shape[1] or weight.shape[1] != 1:
        raise DimensionError(f'Depth-wise kernel shape {weight.shape!r} does not match input {x.shape!r}.')
    xp = pad2d(x, _resolve_padding(padding, weight.shape[2]))
    n, c, h, w = xp.shape
    _, _, kh, kw = weight.shape
    ho, wo = _output_size(h, kh, 1), _output_size(w, kw, 1)
    xd, wd = xp.data, weight.data

    out = np.zeros((n, c, ho, wo), dtype=xd.dtype)
    for i in range(kh):
        for j in range(kw):
            out += _window(xd, i, j, ho, wo, 1) * wd[None, :, 0, i, j, None, None]
    if bias is not None:
        out += bias.data[None, :, None, None]

    def _backward(g):
        gx = np.zeros_like(xd) if xp.requires_grad else None
        gw = np.zeros_like(wd) if weight.requires_grad else None
        for i in range(kh):
            for j in range(kw):
                if gw is not None:
                    gw[:, 0, i, j] = (g * _window(xd, i, j, ho, wo, 1)).sum(axis=(0, 2, 3))
                if gx is not None:
                    _window(gx, i, j, ho, wo, 1)[...] += g * wd[None, :, 0, i, j, None, None]
        gb = g.sum(axis=(0, 2, 3)) if bias is not None and bias.requires_grad else None
        return (gx, gw, gb) if bias is not None else (gx, gw)

    parents = (xp, weight, bias) if bias is not None else (xp, weight)
    return make_result(out, parents, _backward, 'dwconv2d')


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-6) -> Tensor:
    """
    Normalize across the channel axis at every ``(n, h, w)`` location, then apply the
    per-channel affine ``gamma``/``beta``. Variance uses the biased ``1/C`` estimator.
    """
    _check_rank4(x, 'layer_norm')
    c = x.shape[1]
    if c == 0:
        raise DimensionError('Layer norm over zero channels.')
    if gamma.shape != (c,) or beta.shape != (c,):
        raise DimensionError(f'Affine shapes {gamma.shape!r}/{beta.shape!r} do not match {c!r} channels.')

    xd = x.data
    xc = xd - xd.mean(axis=1, keepdims=True)
    inv = 1.0 / np.sqrt((xc * xc).mean(axis=1, keepdims=True) + eps)
    xhat = xc * inv
    g4, b4 = gamma.data[None, :, None, None], beta.data[None, :, None, None]

    def _backward(g):
        gxhat = g * g4
        gx = inv * (gxhat - gxhat.mean(axis=1, keepdims=True)
                    - xhat * (gxhat * xhat).mean(axis=1, keepdims=True))
        return gx, (g * xhat).sum(axis=(0, 2, 3)), g.sum(axis=(0, 2, 3))

    return make_result(xhat * g4 + b4, (x, gamma, beta), _backward, 'layer_norm')


def pixel_unshuffle(x: Tensor, r: int) -> Tensor:
    _check_rank4(x, 'pixel_unshuffle')
    n, c, h, w = x.shape
    if h % r or w % r:
        raise DimensionError(f'Spatial size {(h, w)!r} is not divisible by {r!r}.')
    y = reshape(x, n, c, h // r, r, w // r, r)
    y = transpose(y, 0, 1, 3, 5, 2, 4)
    return reshape(y, n, c * r * r, h // r, w // r)


def pixel_shuffle(x: Tensor, r: int) -> Tensor:
    _check_rank4(x, 'pixel_shuffle')
    n, c, h, w = x.shape
    if c % (r * r):
        raise DimensionError(f'Channel count {c!r} is not divisible by {r * r!r}.')
    y = reshape(x, n, c // (r * r), r, r, h, w)
    y = transpose(y, 0, 1, 4, 2, 5, 3)
    return reshape(y, n, c // (r * r), h * r, w * r)


def global_avg_pool(x: Tensor) -> Tensor:
    _check_rank4(x, 'global_avg_pool')
    if x.shape[2] * x.shape[3] < 1:
        raise DimensionError(f'Cannot pool an empty plane of shape {x.shape!r}.')
    return mean(x, axis=(2, 3), keepdims=True)
