import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from ..config import TrainConfig
from ..tensor import Parameter


def cosine_lr(t: int, total: int, lr_init: float, lr_final: float) -> float:
    if total == 0:
        return lr_init
    if not 0 <= t <= total:
        raise ValueError(f'Step {t!r} outside the schedule [0, {total!r}].')
    return lr_final + 0.5 * (lr_init - lr_final) * (1 + math.cos(math.pi * t / total))


@dataclass
class OptimizerState:
    step: int = 0
    exp_avg: List[np.ndarray] = field(default_factory=list)
    exp_avg_sq: List[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_params(cls, params: Sequence[Parameter]) -> 'OptimizerState':
        return cls(
            step=0,
            exp_avg=[np.zeros_like(p.data) for p in params],
            exp_avg_sq=[np.zeros_like(p.data) for p in params],
        )


def adamw_step(params: Sequence[Parameter], grads: Sequence[Optional[np.ndarray]], state: OptimizerState,
               lr: float, cfg: TrainConfig = TrainConfig()):
    """
    One AdamW update, in place.

    Weight decay is decoupled (``p -= lr·wd·p`` before the adaptive step) and skipped
    for parameters created with ``decay=False``. A missing gradient counts as zero.
    """
    assert len(params) == len(grads) == len(state.exp_avg) == len(state.exp_avg_sq), \
        f'{len(params)} parameters, {len(grads)} gradients and {len(state.exp_avg)} moment buffers given.'
    state.step += 1
    b1, b2 = cfg.beta1, cfg.beta2
    bias1 = 1.0 - b1 ** state.step
    bias2 = 1.0 - b2 ** state.step

    for p, g, m, v in zip(params, grads, state.exp_avg, state.exp_avg_sq):
        assert m.shape == p.shape, f'Moment buffer {m.shape!r} does not match parameter {p.shape!r}.'
        if g is None:
            g = np.zeros_like(p.data)
        if p.decay and cfg.weight_decay:
            p.data *= 1.0 - lr * cfg.weight_decay
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p.data -= lr * (m / bias1) / (np.sqrt(v / bias2) + cfg.adam_eps)


def clip_grad_norm(params: Sequence[Parameter], max_norm: float) -> float:
    total = math.sqrt(sum(float(np.sum(np.square(p.grad, dtype=np.float64)))
                          for p in params if p.grad is not None))
    if max_norm > 0 and total > max_norm:
        factor = max_norm / (total + 1e-6)
        for p in params:
            if p.grad is not None:
                p.grad *= factor
    return total


class AdamW:
    def __init__(self, params: Sequence[Parameter], cfg: TrainConfig = TrainConfig()):
        self.params = list(params)
        self.cfg = cfg
        self.state = OptimizerState.for_params(self.params)

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()

    def step(self, lr: float):
        if self.cfg.grad_clip:
            clip_grad_norm(self.params, self.cfg.grad_clip)
        adamw_step(self.params, [p.grad for p in self.params], self.state, lr, self.cfg)
