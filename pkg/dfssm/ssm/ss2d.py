from enum import Enum
from typing import Optional, List

import numpy as np

from .scan import SelectiveScanParams, scan_with_params, scan_flops
from ..errors import DimensionError
from ..tensor import Tensor, Module, reshape, swapaxes, flip, stack, getitem


class ScanDirection(str, Enum):
    ROW_FORWARD = 'row-forward'
    ROW_BACKWARD = 'row-backward'
    COL_FORWARD = 'col-forward'
    COL_BACKWARD = 'col-backward'

    @property
    def column_major(self) -> bool:
        return self in (ScanDirection.COL_FORWARD, ScanDirection.COL_BACKWARD)

    @property
    def reversed(self) -> bool:
        return self in (ScanDirection.ROW_BACKWARD, ScanDirection.COL_BACKWARD)


DIRECTIONS: List[ScanDirection] = list(ScanDirection)


def flatten_direction(x: Tensor, direction: ScanDirection) -> Tensor:
    """
    ``(..., h, w) → (..., h·w)`` in the pixel order of ``direction``.
    """
    h, w = x.shape[-2:]
    lead = x.shape[:-2]
    if direction.column_major:
        x = swapaxes(x, -1, -2)
    seq = reshape(x, *lead, h * w)
    return flip(seq, -1) if direction.reversed else seq


def unflatten_direction(seq: Tensor, direction: ScanDirection, h: int, w: int) -> Tensor:
    if seq.shape[-1] != h * w:
        raise DimensionError(f'Sequence of length {seq.shape[-1]!r} cannot fill a {h!r}×{w!r} map.')
    lead = seq.shape[:-1]
    if direction.reversed:
        seq = flip(seq, -1)
    if direction.column_major:
        return swapaxes(reshape(seq, *lead, w, h), -1, -2)
    return reshape(seq, *lead, h, w)


def ss2d(x: Tensor, params: SelectiveScanParams, chunk: Optional[int] = None) -> Tensor:
    """
    Four-direction 2D selective scan.

    :param x: Feature map ``(n, D, h, w)``.
    :param params: Parameters stacked per direction, in :data:`DIRECTIONS` order,
        i.e. ``proj (4, D + 2N, D)``, ``dt_bias (4, D)``, ``A_log (4, D, N)`` and ``D_skip (4, D)``.
    :returns: Sum of the four unflattened direction outputs, shaped like ``x``.
    """
    if x.ndim != 4:
        raise DimensionError(f'ss2d expects a rank-4 tensor, but shape {x.shape!r} found.')
    if params.A_log.ndim != 3 or params.A_log.shape[0] != len(DIRECTIONS):
        raise DimensionError(f'Expected parameters for {len(DIRECTIONS)} directions, '
                             f'but state matrix of shape {params.A_log.shape!r} found.')
    n, d, h, w = x.shape
    seqs = stack([flatten_direction(x, direction) for direction in DIRECTIONS], axis=0)

    # (4, ...) parameters broadcast over the batch axis of (4, n, D, L)
    ys = scan_with_params(
        seqs,
        reshape(params.proj, len(DIRECTIONS), 1, *params.proj.shape[1:]),
        reshape(params.dt_bias, len(DIRECTIONS), 1, d),
        reshape(params.A_log, len(DIRECTIONS), 1, *params.A_log.shape[1:]),
        reshape(params.D_skip, len(DIRECTIONS), 1, d),
        chunk=chunk,
    )

    out = None
    for i, direction in enumerate(DIRECTIONS):
        part = unflatten_direction(getitem(ys, i), direction, h, w)
        out = part if out is None else out + part
    return out


class SS2D(Module):
    def __init__(self, channels: int, state_dim: int, rng: np.random.Generator, chunk: Optional[int] = None):
        params = SelectiveScanParams.init(channels, state_dim, rng, stack=(len(DIRECTIONS),))
        self.proj = params.proj
        self.dt_bias = params.dt_bias
        self.A_log = params.A_log
        self.D_skip = params.D_skip
        self.chunk = chunk

    @property
    def params(self) -> SelectiveScanParams:
        return SelectiveScanParams(self.proj, self.dt_bias, self.A_log, self.D_skip)

    def direction_params(self, direction: ScanDirection) -> SelectiveScanParams:
        i = DIRECTIONS.index(direction)
        return SelectiveScanParams(*(type(p)(p.data[i].copy(), decay=p.decay) for p in
                                     (self.proj, self.dt_bias, self.A_log, self.D_skip)))

    def forward(self, x: Tensor) -> Tensor:
        return ss2d(x, self.params, self.chunk)

    def flops(self, h: int, w: int) -> int:
        d, n = self.A_log.shape[-2:]
        return len(DIRECTIONS) * scan_flops(d, h * w, n) + (len(DIRECTIONS) - 1) * d * h * w
