from collections import OrderedDict
from typing import Iterator, Tuple, List, Dict, Iterable

import numpy as np

from .tensor import Parameter
from ..errors import CheckpointMismatchError


class Module:
    """
    Container of parameters and sub-modules, discovered in attribute order.

    Parameter names are dotted attribute paths (``enc.0.ssg.0.ssb.scale``), which is
    also the checkpoint name-space.
    """

    def forward(self, *args, **kwargs):
        raise NotImplementedError  # pragma: no cover

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def named_children(self) -> Iterator[Tuple[str, 'Module']]:
        for key, value in vars(self).items():
            if isinstance(value, Module):
                yield key, value

    def named_parameters(self, prefix: str = '') -> Iterator[Tuple[str, Parameter]]:
        for key, value in vars(self).items():
            if isinstance(value, Parameter):
                yield f'{prefix}{key}', value
            elif isinstance(value, Module):
                yield from value.named_parameters(f'{prefix}{key}.')

    def parameters(self) -> List[Parameter]:
        return [p for _, p in self.named_parameters()]

    def assign_names(self) -> 'Module':
        seen = set()
        for name, param in self.named_parameters():
            assert id(param) not in seen, f'Parameter {name!r} is shared between modules.'
            seen.add(id(param))
            param.name = name
        return self

    def num_params(self) -> int:
        return int(sum(p.size for p in self.parameters()))

    def zero_grad(self):
        for param in self.parameters():
            param.zero_grad()

    def astype(self, dtype) -> 'Module':
        for param in self.parameters():
            param.data = param.data.astype(dtype)
            param.grad = None
        return self

    def flops(self, h: int, w: int) -> int:
        return sum(child.flops(h, w) for _, child in self.named_children())

    def state_dict(self) -> Dict[str, np.ndarray]:
        return OrderedDict((name, param.data.copy()) for name, param in self.named_parameters())

    def load_state_dict(self, state: Dict[str, np.ndarray]):
        """
        Copy ``state`` into the parameters, which must match one for one.

        :raises CheckpointMismatchError: On the first missing, unexpected or mis-shaped entry.
        """
        params = OrderedDict(self.named_parameters())
        for name, param in params.items():
            if name not in state:
                raise CheckpointMismatchError(name, 'missing from checkpoint')
            if tuple(state[name].shape) != param.shape:
                raise CheckpointMismatchError(
                    name, f'shape {tuple(state[name].shape)!r} in checkpoint, {param.shape!r} in model')
        for name in state:
            if name not in params:
                raise CheckpointMismatchError(name, 'not present in model')

        for name, param in params.items():
            param.data = np.array(state[name], dtype=param.dtype, copy=True)
            param.grad = None


class ModuleList(Module):
    def __init__(self, modules: Iterable[Module] = ()):
        self._items: List[Module] = list(modules)

    def __len__(self):
        return len(self._items)

    def __iter__(self) -> Iterator[Module]:
        return iter(self._items)

    def __getitem__(self, index) -> Module:
        return self._items[index]

    def named_children(self) -> Iterator[Tuple[str, Module]]:
        for i, item in enumerate(self._items):
            yield str(i), item

    def named_parameters(self, prefix: str = '') -> Iterator[Tuple[str, Parameter]]:
        for i, item in enumerate(self._items):
            yield from item.named_parameters(f'{prefix}{i}.')
