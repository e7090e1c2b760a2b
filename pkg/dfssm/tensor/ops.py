import math
from dataclasses import dataclass
from typing import Sequence, Union, Tuple

import numpy as np
from scipy.special import expit, erf

from .tensor import Tensor, as_tensor, make_result
from ..errors import DimensionError

Axis = Union[None, int, Tuple[int, ...]]

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _operands(a, b) -> Tuple[Tensor, Tensor]:
    if isinstance(a, Tensor) and not isinstance(b, Tensor):
        b = Tensor(b, dtype=a.dtype)
    elif isinstance(b, Tensor) and not isinstance(a, Tensor):
        a = Tensor(a, dtype=b.dtype)
    return as_tensor(a), as_tensor(b)


def add(a, b) -> Tensor:
    a, b = _operands(a, b)

    def _backward(g):
        return unbroadcast(g, a.shape), unbroadcast(g, b.shape)

    return make_result(a.data + b.data, (a, b), _backward, 'add')


def sub(a, b) -> Tensor:
    a, b = _operands(a, b)

    def _backward(g):
        return unbroadcast(g, a.shape), unbroadcast(-g, b.shape)

    return make_result(a.data - b.data, (a, b), _backward, 'sub')


def mul(a, b) -> Tensor:
    a, b = _operands(a, b)

    def _backward(g):
        return (
            unbroadcast(g * b.data, a.shape) if a.requires_grad else None,
            unbroadcast(g * a.data, b.shape) if b.requires_grad else None,
        )

    return make_result(a.data * b.data, (a, b), _backward, 'mul')


def div(a, b) -> Tensor:
    a, b = _operands(a, b)
    out = a.data / b.data

    def _backward(g):
        return (
            unbroadcast(g / b.data, a.shape) if a.requires_grad else None,
            unbroadcast(-g * out / b.data, b.shape) if b.requires_grad else None,
        )

    return make_result(out, (a, b), _backward, 'div')


def neg(x: Tensor) -> Tensor:
    return make_result(-x.data, (x,), lambda g: (-g,), 'neg')


def exp(x: Tensor) -> Tensor:
    out = np.exp(x.data)
    return make_result(out, (x,), lambda g: (g * out,), 'exp')


def log(x: Tensor) -> Tensor:
    return make_result(np.log(x.data), (x,), lambda g: (g / x.data,), 'log')


def sqrt(x: Tensor) -> Tensor:
    out = np.sqrt(x.data)
    return make_result(out, (x,), lambda g: (g * 0.5 / out,), 'sqrt')


def abs_(x: Tensor) -> Tensor:
    # subgradient 0 at ties
    return make_result(np.abs(x.data), (x,), lambda g: (g * np.sign(x.data),), 'abs')


def complex_abs(re: Tensor, im: Tensor) -> Tensor:
    out = np.hypot(re.data, im.data)

    def _backward(g):
        safe = np.where(out > 0, out, 1)
        scale = np.where(out > 0, g / safe, 0)
        return scale * re.data, scale * im.data

    return make_result(out, (re, im), _backward, 'complex_abs')


def relu(x: Tensor) -> Tensor:
    return make_result(np.maximum(x.data, 0), (x,), lambda g: (g * (x.data > 0),), 'relu')


def sigmoid(x: Tensor) -> Tensor:
    out = expit(x.data)
    return make_result(out, (x,), lambda g: (g * out * (1 - out),), 'sigmoid')


def silu(x: Tensor) -> Tensor:
    s = expit(x.data)
    return make_result(x.data * s, (x,), lambda g: (g * s * (1 + x.data * (1 - s)),), 'silu')


def gelu(x: Tensor) -> Tensor:
    cdf = 0.5 * (1 + erf(x.data * _INV_SQRT2))
    pdf = np.exp(-0.5 * x.data * x.data) * _INV_SQRT_2PI
    return make_result(x.data * cdf, (x,), lambda g: (g * (cdf + x.data * pdf),), 'gelu')


def softplus(x: Tensor) -> Tensor:
    return make_result(np.logaddexp(0, x.data), (x,), lambda g: (g * expit(x.data),), 'softplus')


ACTIVATIONS = {
    'silu': silu,
    'gelu': gelu,
    'sigmoid': sigmoid,
    'relu': relu,
}


def activation(x: Tensor, kind: str) -> Tensor:
    if kind not in ACTIVATIONS:
        raise ValueError(f'Unknown activation {kind!r}, one of {sorted(ACTIVATIONS)!r} expected.')
    return ACTIVATIONS[kind](x)


def _norm_axis(axis: Axis, ndim: int) -> Tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(a % ndim for a in axis)


def sum_(x: Tensor, axis: Axis = None, keepdims: bool = False) -> Tensor:
    axes = _norm_axis(axis, x.ndim)
    out = x.data.sum(axis=axes, keepdims=keepdims)

    def _backward(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return np.broadcast_to(g, x.shape).copy(),

    return make_result(np.asarray(out), (x,), _backward, 'sum')


def mean(x: Tensor, axis: Axis = None, keepdims: bool = False) -> Tensor:
    axes = _norm_axis(axis, x.ndim)
    count = int(np.prod([x.shape[a] for a in axes])) if axes else 1
    out = x.data.mean(axis=axes, keepdims=keepdims)

    def _backward(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return np.broadcast_to(g / count, x.shape).copy(),

    return make_result(np.asarray(out, dtype=x.dtype), (x,), _backward, 'mean')


def reshape(x: Tensor, *shape) -> Tensor:
    if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
        shape = tuple(shape[0])
    try:
        out = x.data.reshape(shape)
    except ValueError as err:
        raise DimensionError(f'Cannot reshape {x.shape!r} into {shape!r}.') from err
    return make_result(out, (x,), lambda g: (g.reshape(x.shape),), 'reshape')


def transpose(x: Tensor, *axes) -> Tensor:
    if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
        axes = tuple(axes[0])
    if not axes:
        axes = tuple(reversed(range(x.ndim)))
    inverse = tuple(np.argsort(axes))
    return make_result(np.ascontiguousarray(x.data.transpose(axes)), (x,),
                       lambda g: (g.transpose(inverse),), 'transpose')


def swapaxes(x: Tensor, a: int, b: int) -> Tensor:
    axes = list(range(x.ndim))
    axes[a], axes[b] = axes[b], axes[a]
    return transpose(x, tuple(axes))


def flip(x: Tensor, axis: int) -> Tensor:
    return make_result(np.ascontiguousarray(np.flip(x.data, axis)), (x,), lambda g: (np.flip(g, axis),), 'flip')


def getitem(x: Tensor, index) -> Tensor:
    if isinstance(index, Tensor):
        raise TypeError('Tensor indices are not supported.')

    basic = all(isinstance(i, (int, slice, type(Ellipsis), type(None)))
                for i in (index if isinstance(index, tuple) else (index,)))

    def _backward(g):
        grad = np.zeros_like(x.data)
        if basic:
            grad[index] = g
        else:
            np.add.at(grad, index, g)
        return grad,

    return make_result(np.array(x.data[index]), (x,), _backward, 'getitem')


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = tuple(as_tensor(t) for t in tensors)
    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as err:
        raise DimensionError(f'Cannot concatenate shapes {[t.shape for t in tensors]!r} '
                             f'on axis {axis!r}.') from err
    bounds = np.cumsum([0] + [t.shape[axis] for t in tensors])

    def _backward(g):
        return tuple(np.take(g, np.arange(s, e), axis=axis) for s, e in zip(bounds[:-1], bounds[1:]))

    return make_result(out, tensors, _backward, 'concat')


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = tuple(as_tensor(t) for t in tensors)
    try:
        out = np.stack([t.data for t in tensors], axis=axis)
    except ValueError as err:
        raise DimensionError(f'Cannot stack shapes {[t.shape for t in tensors]!r}.') from err

    def _backward(g):
        return tuple(np.take(g, i, axis=axis) for i in range(len(tensors)))

    return make_result(out, tensors, _backward, 'stack')


@dataclass(frozen=True)
class PaddingSpec:
    """
    Explicit spatial padding, ``mode`` is ``zero`` or ``reflect``.
    """
    top: int
    bottom: int
    left: int
    right: int
    mode: str = 'zero'

    @classmethod
    def same(cls, kernel_size: int, mode: str = 'zero') -> 'PaddingSpec':
        p = kernel_size // 2
        return cls(p, p, p, p, mode)

    @classmethod
    def symmetric(cls, amount: int, mode: str = 'zero') -> 'PaddingSpec':
        return cls(amount, amount, amount, amount, mode)

    def is_zero(self) -> bool:
        return self.top == self.bottom == self.left == self.right == 0


def reflect_indices(size: int, before: int, after: int) -> np.ndarray:
    idx = np.arange(-before, size + after)
    if size == 1:
        return np.zeros_like(idx)
    period = 2 * (size - 1)
    idx = np.mod(idx, period)
    return np.where(idx >= size, period - idx, idx)


def pad2d(x: Tensor, padding: PaddingSpec) -> Tensor:
    if padding.is_zero():
        return x
    if min(padding.top, padding.bottom, padding.left, padding.right) < 0:
        raise DimensionError(f'Negative padding {padding!r}.')
    h, w = x.shape[-2:]
    if padding.mode == 'zero':
        widths = [(0, 0)] * (x.ndim - 2) + [(padding.top, padding.bottom), (padding.left, padding.right)]
        out = np.pad(x.data, widths)

        def _backward(g):
            return g[..., padding.top:padding.top + h, padding.left:padding.left + w],

        return make_result(out, (x,), _backward, 'pad2d')

    elif padding.mode == 'reflect':
        if h == 0 or w == 0:
            raise DimensionError(f'Cannot reflect-pad an empty plane of shape {x.shape!r}.')
        rows = reflect_indices(h, padding.top, padding.bottom)
        cols = reflect_indices(w, padding.left, padding.right)
        out = x.data[..., rows[:, None], cols[None, :]]

        def _backward(g):
            grad = np.zeros_like(x.data)
            np.add.at(grad, (Ellipsis, rows[:, None], cols[None, :]), g)
            return grad,

        return make_result(out, (x,), _backward, 'pad2d')

    else:
        raise ValueError(f'Unknown padding mode {padding.mode!r}.')


def crop2d(x: Tensor, h: int, w: int) -> Tensor:
    return getitem(x, (Ellipsis, slice(0, h), slice(0, w)))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = _operands(a, b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise DimensionError(f'Cannot multiply matrices of shapes {a.shape!r} and {b.shape!r}.')

    def _backward(g):
        return (
            unbroadcast(np.matmul(g, np.swapaxes(b.data, -1, -2)), a.shape) if a.requires_grad else None,
            unbroadcast(np.matmul(np.swapaxes(a.data, -1, -2), g), b.shape) if b.requires_grad else None,
        )

    return make_result(np.matmul(a.data, b.data), (a, b), _backward, 'matmul')


def _install_operators():
    Tensor.__add__ = lambda self, other: add(self, other)
    Tensor.__radd__ = lambda self, other: add(other, self)
    Tensor.__sub__ = lambda self, other: sub(self, other)
    Tensor.__rsub__ = lambda self, other: sub(other, self)
    Tensor.__mul__ = lambda self, other: mul(self, other)
    Tensor.__rmul__ = lambda self, other: mul(other, self)
    Tensor.__truediv__ = lambda self, other: div(self, other)
    Tensor.__rtruediv__ = lambda self, other: div(other, self)
    Tensor.__neg__ = lambda self: neg(self)
    Tensor.__matmul__ = lambda self, other: matmul(self, other)
    Tensor.__getitem__ = lambda self, index: getitem(self, index)
    Tensor.sum = lambda self, axis=None, keepdims=False: sum_(self, axis, keepdims)
    Tensor.mean = lambda self, axis=None, keepdims=False: mean(self, axis, keepdims)
    Tensor.reshape = lambda self, *shape: reshape(self, *shape)
    Tensor.transpose = lambda self, *axes: transpose(self, *axes)
    Tensor.swapaxes = lambda self, a, b: swapaxes(self, a, b)
    Tensor.flip = lambda self, axis: flip(self, axis)
    Tensor.exp = lambda self: exp(self)
    Tensor.abs = lambda self: abs_(self)


_install_operators()