"""
Rank-N float tensors with reverse-mode automatic differentiation.

Every op produces a new :class:`Tensor`; when any input requires gradients the
output remembers its parents and a backward rule. :func:`backward` records the
reachable ops into a :class:`Tape` in topological order and replays it in
reverse, accumulating gradients into the leaves that require them.
"""
import threading
from contextlib import contextmanager
from typing import Optional, Callable, Tuple, List, Dict

import numpy as np

from ..errors import UsageError, NumericError

_STATE = threading.local()

BackwardFn = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]


def _get(name, default):
    return getattr(_STATE, name, default)


def get_default_dtype() -> np.dtype:
    return np.dtype(_get('dtype', np.float32))


def is_grad_enabled() -> bool:
    return _get('grad', True)


def is_checked() -> bool:
    return _get('checked', False)


@contextmanager
def _scoped(name, value, default):
    old = _get(name, default)
    setattr(_STATE, name, value)
    try:
        yield
    finally:
        setattr(_STATE, name, old)


@contextmanager
def precision(dtype):
    dtype = np.dtype(dtype)
    if dtype not in (np.dtype(np.float32), np.dtype(np.float64)):
        raise UsageError(f'Unsupported precision {dtype!r}.')
    with _scoped('dtype', dtype, np.float32):
        yield


@contextmanager
def no_grad():
    with _scoped('grad', False, True):
        yield


@contextmanager
def checked(enabled: bool = True):
    """
    Raise :class:`NumericError` as soon as any op produces NaN or Inf.
    """
    with _scoped('checked', enabled, False):
        yield


class Tensor:
    def __init__(self, data, requires_grad: bool = False, dtype=None):
        if isinstance(data, Tensor):
            data = data.data
        if dtype is None:
            if isinstance(data, np.ndarray) and data.dtype in (np.float32, np.float64):
                dtype = data.dtype
            else:
                dtype = get_default_dtype()
        self.data: np.ndarray = np.asarray(data, dtype=dtype)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = bool(requires_grad)
        self._parents: Tuple['Tensor', ...] = ()
        self._backward: Optional[BackwardFn] = None
        self._op: Optional[str] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float(self.data)

    def detach(self) -> 'Tensor':
        return Tensor(self.data)

    def zero_grad(self):
        self.grad = None

    def accumulate_grad(self, grad: np.ndarray):
        assert grad.shape == self.data.shape, \
            f'Gradient shape {grad.shape!r} does not match tensor shape {self.data.shape!r}.'
        if self.grad is None:
            self.grad = np.array(grad, dtype=self.data.dtype, copy=True)
        else:
            self.grad += grad

    def backward(self, grad: Optional[np.ndarray] = None):
        backward(self, grad)

    def __repr__(self):
        flag = ', requires_grad=True' if self.requires_grad else ''
        op = f', op={self._op!r}' if self._op else ''
        return f'{self.__class__.__name__}(shape={self.shape!r}, dtype={self.dtype.name}{flag}{op})'

    # operator overloads are attached in ops.py


class Parameter(Tensor):
    def __init__(self, data, decay: bool = True, dtype=None):
        Tensor.__init__(self, data, requires_grad=True, dtype=dtype)
        self.name: Optional[str] = None
        self.decay = decay

    def __repr__(self):
        return f'Parameter({self.name!r}, shape={self.shape!r}, dtype={self.dtype.name})'


def as_tensor(value, dtype=None) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(value, dtype=dtype)


def make_result(data: np.ndarray, parents: Tuple[Tensor, ...], backward_fn: BackwardFn, op: str) -> Tensor:
    out = Tensor(data, dtype=data.dtype if data.dtype in (np.float32, np.float64) else None)
    if is_checked() and not np.all(np.isfinite(out.data)):
        raise NumericError(f'Non-finite value produced by op {op!r}, output shape {out.shape!r}.')
    if is_grad_enabled() and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._backward = backward_fn
        out._op = op
    return out


class Tape:
    """
    Ops reachable from a root tensor, in the order they were applied.
    """

    def __init__(self, nodes: List[Tensor]):
        self.nodes = nodes

    def __len__(self):
        return len(self.nodes)

    @classmethod
    def record(cls, root: Tensor) -> 'Tape':
        nodes, visited = [], set()
        stack = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                nodes.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))
        return cls(nodes)

    def replay(self, root: Tensor, grad: np.ndarray):
        grads: Dict[int, np.ndarray] = {id(root): grad}
        for node in reversed(self.nodes):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._backward is None:
                node.accumulate_grad(g)
                continue

            parent_grads = node._backward(g)
            assert len(parent_grads) == len(node._parents), \
                f'Op {node._op!r} returned {len(parent_grads)} gradients for {len(node._parents)} inputs.'
            for parent, pg in zip(node._parents, parent_grads):
                if pg is None or not parent.requires_grad:
                    continue
                key = id(parent)
                if key in grads:
                    grads[key] = grads[key] + pg
                else:
                    grads[key] = pg


def backward(loss: Tensor, grad: Optional[np.ndarray] = None):
    """
    Accumulate ``d loss / d leaf`` into ``.grad`` of every leaf requiring gradients.

    Calling it again without zeroing accumulates a second time.
    """
    if not loss.requires_grad:
        raise UsageError('Backward called on a tensor that does not require gradients.')
    if grad is None:
        if loss.size != 1:
            raise UsageError(f'Backward needs a scalar loss, but shape {loss.shape!r} found.')
        grad = np.ones_like(loss.data)
    else:
        grad = np.asarray(grad, dtype=loss.dtype).reshape(loss.shape)

    Tape.record(loss).replay(loss, grad)
