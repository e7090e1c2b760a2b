"""
Selective-scan state space kernel.

For every channel ``d`` and state ``n``, starting from ``h_0 = 0``::

    h_t = exp(Δ_t·A_dn)·h_{t-1} + Δ_t·B_tn·x_t
    y_t = Σ_n C_tn·h_t + D_d·x_t

The forward pass keeps only the hidden state at chunk boundaries; the backward
pass recomputes each chunk's states from its boundary and sweeps it in reverse.
"""
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..errors import DimensionError
from ..tensor import Tensor, Parameter, Module, make_result, matmul, softplus, exp, neg, getitem, swapaxes, \
    reshape, unbroadcast, get_default_dtype

#: cost per (step, channel, state): discretize, update and read out
SCAN_FLOPS_PER_STATE = 6

DT_MIN, DT_MAX = 1e-3, 1e-1


def default_chunk(length: int) -> int:
    return max(1, math.ceil(math.sqrt(length)))


def _chunk_states(dt: np.ndarray, xt: np.ndarray, A: np.ndarray, Bt: np.ndarray, h0: np.ndarray):
    da = np.exp(dt[..., None] * A)
    du = (dt * xt)[..., None] * Bt[..., None, :]
    hs = np.empty_like(du)
    h = h0
    for t in range(da.shape[0]):
        h = da[t] * h + du[t]
        hs[t] = h
    return da, hs


def selective_scan(x: Tensor, delta: Tensor, A: Tensor, B: Tensor, C: Tensor, D: Tensor,
                   chunk: Optional[int] = None) -> Tensor:
    """
    Run the selective scan over the last axis.

    :param x: Input sequences ``(..., D, L)``.
    :param delta: Positive step sizes ``(..., D, L)``.
    :param A: Negative state matrix, broadcastable to ``(..., D, N)``.
    :param B: Input coefficients ``(..., L, N)``.
    :param C: Output coefficients ``(..., L, N)``.
    :param D: Feedthrough, broadcastable to ``(..., D)``.
    :param chunk: Steps between stored hidden states, ``ceil(sqrt(L))`` by default.
    :returns: Output sequences shaped like ``x``.
    """
    if x.ndim < 2 or x.shape != delta.shape:
        raise DimensionError(f'Input {x.shape!r} and step sizes {delta.shape!r} must both be (..., D, L).')
    *lead, d, length = x.shape
    if length < 1:
        raise DimensionError('Selective scan needs at least one step.')
    if B.shape[-2] != length or C.shape != B.shape:
        raise DimensionError(f'Coefficients B {B.shape!r} and C {C.shape!r} do not match length {length!r}.')
    n = B.shape[-1]
    if A.shape[-2:] != (d, n):
        raise DimensionError(f'State matrix {A.shape!r} does not match {d!r} channels and {n!r} states.')
    chunk = chunk or default_chunk(length)

    batch = tuple(np.broadcast_shapes(tuple(lead), B.shape[:-2], A.shape[:-2], D.shape[:-1]))
    xt = np.moveaxis(np.broadcast_to(x.data, (*batch, d, length)), -1, 0)
    dt = np.moveaxis(np.broadcast_to(delta.data, (*batch, d, length)), -1, 0)
    Bt = np.moveaxis(np.broadcast_to(B.data, (*batch, length, n)), -2, 0)
    Ct = np.moveaxis(np.broadcast_to(C.data, (*batch, length, n)), -2, 0)
    Ab = np.broadcast_to(A.data, (*batch, d, n))
    Db = np.broadcast_to(D.data, (*batch, d))
    starts = list(range(0, length, chunk))

    boundaries = []
    yt = np.empty((length, *batch, d), dtype=xt.dtype)
    h = np.zeros((*batch, d, n), dtype=xt.dtype)
    for start in starts:
        sl = slice(start, min(start + chunk, length))
        boundaries.append(h)
        _, hs = _chunk_states(dt[sl], xt[sl], Ab, Bt[sl], h)
        yt[sl] = np.einsum('t...dn,t...n->t...d', hs, Ct[sl])
        h = hs[-1]
    yt += Db * xt

    def _backward(g):
        gyt = np.moveaxis(np.broadcast_to(g, (*batch, d, length)), -1, 0)
        gx = np.zeros_like(xt)
        gdt = np.zeros_like(dt)
        gA = np.zeros_like(Ab)
        gB = np.zeros_like(Bt)
        gC = np.zeros_like(Ct)
        carry = np.zeros((*batch, d, n), dtype=xt.dtype)

        for start, h0 in reversed(list(zip(starts, boundaries))):
            sl = slice(start, min(start + chunk, length))
            da, hs = _chunk_states(dt[sl], xt[sl], Ab, Bt[sl], h0)
            hprev = np.concatenate([h0[None], hs[:-1]], axis=0)
            gh = gyt[sl][..., None] * Ct[sl][..., None, :]
            for t in reversed(range(da.shape[0])):
                gh[t] += carry
                carry = gh[t] * da[t]

            gC[sl] = np.einsum('t...d,t...dn->t...n', gyt[sl], hs)
            gexp = gh * hprev * da
            gdt[sl] += np.einsum('t...dn,...dn->t...d', gexp, Ab)
            gA += np.einsum('t...dn,t...d->...dn', gexp, dt[sl])
            gdtx = np.einsum('t...dn,t...n->t...d', gh, Bt[sl])
            gB[sl] = np.einsum('t...dn,t...d->t...n', gh, dt[sl] * xt[sl])
            gdt[sl] += gdtx * xt[sl]
            gx[sl] += gdtx * dt[sl]

        gx += gyt * Db
        gD = (gyt * xt).sum(axis=0)
        return (
            unbroadcast(np.moveaxis(gx, 0, -1), x.shape),
            unbroadcast(np.moveaxis(gdt, 0, -1), delta.shape),
            unbroadcast(gA, A.shape),
            unbroadcast(np.moveaxis(gB, 0, -2), B.shape),
            unbroadcast(np.moveaxis(gC, 0, -2), C.shape),
            unbroadcast(gD, D.shape),
        )

    return make_result(np.moveaxis(yt, 0, -1), (x, delta, A, B, C, D), _backward, 'selective_scan')


def scan_flops(channels: int, length: int, state_dim: int) -> int:
    projection = (channels + 2 * state_dim) * channels * length
    recurrence = SCAN_FLOPS_PER_STATE * length * channels * state_dim
    return projection + recurrence + 2 * length * channels


def inverse_softplus(y: np.ndarray) -> np.ndarray:
    return y + np.log(-np.expm1(-y))


@dataclass
class SelectiveScanParams:
    """
    Parameters of one scan, or of several stacked on leading axes.

    ``proj`` maps each input column to ``[Δ-logit (D), B (N), C (N)]``; the step size is
    ``softplus(logit + dt_bias)`` and the state matrix ``A = -exp(A_log)``.
    """
    proj: Parameter
    dt_bias: Parameter
    A_log: Parameter
    D_skip: Parameter

    @classmethod
    def init(cls, channels: int, state_dim: int, rng: np.random.Generator,
             stack: Tuple[int, ...] = ()) -> 'SelectiveScanParams':
        dtype = get_default_dtype()
        bound = 1.0 / math.sqrt(channels)
        proj = rng.uniform(-bound, bound, size=(*stack, channels + 2 * state_dim, channels))
        dt = np.exp(rng.uniform(math.log(DT_MIN), math.log(DT_MAX), size=(*stack, channels)))
        a_log = np.broadcast_to(np.log(np.arange(1, state_dim + 1, dtype=np.float64)),
                                (*stack, channels, state_dim))
        return cls(
            proj=Parameter(proj.astype(dtype)),
            dt_bias=Parameter(inverse_softplus(dt).astype(dtype), decay=False),
            A_log=Parameter(np.array(a_log, dtype=dtype), decay=False),
            D_skip=Parameter(np.ones((*stack, channels), dtype=dtype), decay=False),
        )

    @property
    def channels(self) -> int:
        return self.D_skip.shape[-1]

    @property
    def state_dim(self) -> int:
        return self.A_log.shape[-1]

    def check_stability(self):
        a = -np.exp(self.A_log.data)
        assert np.all(a < 0), f'State matrix must be strictly negative, but max {a.max()!r} found.'


def scan_with_params(seq: Tensor, proj: Tensor, dt_bias: Tensor, A_log: Tensor, D_skip: Tensor,
                     chunk: Optional[int] = None) -> Tensor:
    """
    Derive ``Δ, A, B, C`` from the parameters and run :func:`selective_scan`.

    Parameter leading axes must already broadcast against those of ``seq``.
    """
    d, n = A_log.shape[-2:]
    if seq.shape[-2] != d:
        raise DimensionError(f'Sequence of {seq.shape[-2]!r} channels fed to a {d!r}-channel scan.')
    coeffs = matmul(proj, seq)
    logit = getitem(coeffs, (Ellipsis, slice(0, d), slice(None)))
    B = swapaxes(getitem(coeffs, (Ellipsis, slice(d, d + n), slice(None))), -1, -2)
    C = swapaxes(getitem(coeffs, (Ellipsis, slice(d + n, d + 2 * n), slice(None))), -1, -2)
    delta = softplus(logit + reshape(dt_bias, *dt_bias.shape, 1))
    return selective_scan(seq, delta, neg(exp(A_log)), B, C, D_skip, chunk=chunk)


class SelectiveScan(Module):
    def __init__(self, channels: int, state_dim: int, rng: np.random.Generator, chunk: Optional[int] = None):
        params = SelectiveScanParams.init(channels, state_dim, rng)
        self.proj = params.proj
        self.dt_bias = params.dt_bias
        self.A_log = params.A_log
        self.D_skip = params.D_skip
        self.chunk = chunk

    @property
    def params(self) -> SelectiveScanParams:
        return SelectiveScanParams(self.proj, self.dt_bias, self.A_log, self.D_skip)

    def forward(self, seq: Tensor) -> Tensor:
        return scan_with_params(seq, self.proj, self.dt_bias, self.A_log, self.D_skip, self.chunk)
