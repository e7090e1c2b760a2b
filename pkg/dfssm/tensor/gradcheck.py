"""
Central finite-difference verification of analytic gradients.
"""
from dataclasses import dataclass, field
from typing import Callable, Sequence, Optional, Dict, List

import numpy as np

from .tensor import Tensor, no_grad

#: default perturbation per float type
DEFAULT_EPS = {
    np.dtype(np.float32): 1e-3,
    np.dtype(np.float64): 1e-6,
}

#: default relative tolerance per float type, for single ops
DEFAULT_TOLERANCE = {
    np.dtype(np.float32): 1e-3,
    np.dtype(np.float64): 1e-4,
}


@dataclass
class GradcheckResult:
    errors: Dict[str, float] = field(default_factory=dict)

    @property
    def worst(self) -> float:
        return max(self.errors.values()) if self.errors else 0.0

    @property
    def worst_input(self) -> Optional[str]:
        return max(self.errors, key=self.errors.get) if self.errors else None

    def passed(self, tolerance: float) -> bool:
        return self.worst <= tolerance


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 0.0) -> float:
    denom = max(float(np.linalg.norm(analytic)), float(np.linalg.norm(numeric)), floor)
    if denom == 0.0:
        return 0.0
    return float(np.linalg.norm(analytic - numeric)) / denom


def gradcheck(fn: Callable[..., Tensor], inputs: Sequence[Tensor], names: Optional[Sequence[str]] = None,
              eps: Optional[float] = None, max_elements: Optional[int] = None,
              rng: Optional[np.random.Generator] = None, floor: float = 0.0) -> GradcheckResult:
    """
    Compare the gradients of ``fn`` against central differences.

    The output of ``fn`` is reduced to a scalar with a fixed random projection, so
    every output element contributes with a distinct weight.

    :param fn: Function of the ``inputs`` returning a :class:`Tensor`.
    :param inputs: Tensors to differentiate against. Those not requiring grad are skipped.
    :param names: Display names for ``inputs``, defaults to ``input0, input1, ...``.
    :param eps: Perturbation, defaults to ``1e-3`` at float32 and ``1e-6`` at float64.
    :param max_elements: Check at most this many randomly chosen coordinates per input.
    :param rng: Generator for the projection and the coordinate sampling.
    :param floor: Lower bound of the error denominator, so inputs whose gradient
        vanishes are judged on absolute error.
    :returns: Relative error per input name.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    names = list(names) if names is not None else [f'input{i}' for i in range(len(inputs))]
    assert len(names) == len(inputs), f'{len(names)} names given for {len(inputs)} inputs.'

    out = fn(*inputs)
    weights = rng.standard_normal(out.shape).astype(out.dtype)
    eps = eps if eps is not None else DEFAULT_EPS[out.dtype]

    for tensor in inputs:
        tensor.zero_grad()
    (out * weights).sum().backward()
    analytic_grads = [
        (t.grad if t.grad is not None else np.zeros_like(t.data)).copy() if t.requires_grad else None
        for t in inputs
    ]

    def _objective() -> float:
        with no_grad():
            return float(np.sum(fn(*inputs).data.astype(np.float64) * weights))

    result = GradcheckResult()
    for name, tensor, analytic in zip(names, inputs, analytic_grads):
        if analytic is None:
            continue
        size = tensor.size
        if max_elements is not None and size > max_elements:
            coords = rng.choice(size, size=max_elements, replace=False)
        else:
            coords = np.arange(size)

        numeric: List[float] = []
        for k in coords:
            index = np.unravel_index(k, tensor.shape)
            original = tensor.data[index]
            tensor.data[index] = original + eps
            plus = _objective()
            tensor.data[index] = original - eps
            minus = _objective()
            tensor.data[index] = original
            numeric.append((plus - minus) / (2 * eps))

        result.errors[name] = relative_error(analytic.reshape(-1)[coords].astype(np.float64),
                                             np.asarray(numeric, dtype=np.float64), floor)
        tensor.zero_grad()

    return result
