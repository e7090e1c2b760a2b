"""
Named finite-difference gradient checks over every differentiable op and block.

Each case builds its inputs from a seeded generator and is checked at float64.
:func:`run_suite` returns one row per case and seed, which the ``gradcheck`` command
prints and the tests assert on.
"""
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from ditk import logging
from hbutils.string import plural_word

from .blocks import ChannelAttention, FFTM, SSB, FSSB, MGCB, ConvLayer
from .config import get_preset
from .fft import rfft2, irfft2, ComplexSpectrum
from .network import build_model
from .ssm import selective_scan, scan_with_params, ss2d, SelectiveScanParams, VSSM
from .tensor import Tensor, Module, gradcheck, precision, conv2d, dwconv2d, layer_norm, pixel_shuffle, \
    pixel_unshuffle, pad2d, PaddingSpec, matmul, concat, getitem, exp, log, sqrt, sigmoid, silu, gelu, softplus, \
    sum_, mean, complex_abs, global_avg_pool, transpose, flip
from .training import l1_loss, freq_loss
from .utils import rng_stream

SUITE_MODULES = ('tensor', 'fft', 'ssm', 'blocks', 'network')
DEFAULT_SEEDS = (0, 1, 2)
TOLERANCE = 1e-4

CaseInputs = Tuple[Callable[..., Tensor], List[Tensor], List[str]]


@dataclass(frozen=True)
class GradcheckCase:
    name: str
    module: str
    build: Callable[[np.random.Generator], CaseInputs]
    eps: Optional[float] = None
    max_elements: Optional[int] = None
    floor: float = 0.0


def _t(rng: np.random.Generator, *shape, positive: bool = False) -> Tensor:
    data = rng.standard_normal(shape)
    if positive:
        data = np.abs(data) + 0.5
    return Tensor(data, requires_grad=True)


def _op(fn: Callable[..., Tensor], *shapes, positive: bool = False) -> Callable[[np.random.Generator], CaseInputs]:
    def _build(rng):
        inputs = [_t(rng, *shape, positive=positive) for shape in shapes]
        return fn, inputs, [f'input{i}' for i in range(len(inputs))]

    return _build


def _module(factory: Callable[[np.random.Generator], Module], *shape) \
        -> Callable[[np.random.Generator], CaseInputs]:
    def _build(rng):
        module = factory(rng).assign_names()
        x = _t(rng, *shape)
        params = module.parameters()

        def _fn(x_, *_):
            return module(x_)

        return _fn, [x, *params], ['x', *(p.name for p in params)]

    return _build


def _scan(rng):
    d, length, n = 3, 7, 4
    x = _t(rng, 2, d, length)
    delta = Tensor(np.abs(rng.standard_normal((2, d, length))) * 0.3 + 0.05, requires_grad=True)
    a = Tensor(-(np.abs(rng.standard_normal((d, n))) + 0.2), requires_grad=True)
    b, c = _t(rng, 2, length, n), _t(rng, 2, length, n)
    skip = _t(rng, d)
    return (lambda *ts: selective_scan(*ts, chunk=3)), [x, delta, a, b, c, skip], \
        ['x', 'delta', 'A', 'B', 'C', 'D']


def _scan_params(rng):
    params = SelectiveScanParams.init(3, 2, rng)
    seq = _t(rng, 2, 3, 6)
    inputs = [seq, params.proj, params.dt_bias, params.A_log, params.D_skip]
    return scan_with_params, inputs, ['seq', 'proj', 'dt_bias', 'A_log', 'D_skip']


def _ss2d(rng):
    params = SelectiveScanParams.init(2, 2, rng, stack=(4,))
    x = _t(rng, 1, 2, 3, 4)
    inputs = [x, params.proj, params.dt_bias, params.A_log, params.D_skip]
    return (lambda x_, *ps: ss2d(x_, SelectiveScanParams(*ps))), inputs, \
        ['x', 'proj', 'dt_bias', 'A_log', 'D_skip']


def _rfft2(h: int, w: int):
    def _build(rng):
        return (lambda x: rfft2(x).packed), [_t(rng, 2, 2, h, w)], ['x']

    return _build


def _irfft2(h: int, w: int):
    def _build(rng):
        return (lambda s: irfft2(ComplexSpectrum(s, (h, w)))), [_t(rng, 1, 4, h, w // 2 + 1)], ['spectrum']

    return _build


def _loss(fn):
    def _build(rng):
        pred, target = _t(rng, 2, 3, 6, 5), _t(rng, 2, 3, 6, 5)
        return fn, [pred, target], ['pred', 'target']

    return _build


def _network(rng):
    model = build_model(get_preset('micro'), rng=rng)
    x = Tensor(rng.uniform(0, 1, size=(1, 3, 6, 6)), requires_grad=True)
    params = model.parameters()

    def _fn(x_, *_):
        return model(x_)

    return _fn, [x, *params], ['x', *(p.name for p in params)]


CASES: List[GradcheckCase] = [
    GradcheckCase('add', 'tensor', _op(lambda a, b: a + b, (2, 3, 4), (3, 1))),
    GradcheckCase('mul', 'tensor', _op(lambda a, b: a * b, (2, 3, 4), (1, 4))),
    GradcheckCase('div', 'tensor', _op(lambda a, b: a / b, (2, 3), (2, 3), positive=True)),
    GradcheckCase('exp', 'tensor', _op(exp, (3, 4))),
    GradcheckCase('log', 'tensor', _op(log, (3, 4), positive=True)),
    GradcheckCase('sqrt', 'tensor', _op(sqrt, (3, 4), positive=True)),
    GradcheckCase('sigmoid', 'tensor', _op(sigmoid, (3, 4))),
    GradcheckCase('silu', 'tensor', _op(silu, (3, 4))),
    GradcheckCase('gelu', 'tensor', _op(gelu, (3, 4))),
    GradcheckCase('softplus', 'tensor', _op(softplus, (3, 4))),
    GradcheckCase('complex_abs', 'tensor', _op(complex_abs, (3, 4), (3, 4))),
    GradcheckCase('sum', 'tensor', _op(lambda x: sum_(x, axis=1), (2, 3, 4))),
    GradcheckCase('mean', 'tensor', _op(lambda x: mean(x, axis=(0, 2), keepdims=True), (2, 3, 4))),
    GradcheckCase('transpose', 'tensor', _op(lambda x: transpose(x, 2, 0, 1) * 1.5, (2, 3, 4))),
    GradcheckCase('flip', 'tensor', _op(lambda x: flip(x, 1) * x, (2, 3))),
    GradcheckCase('getitem', 'tensor', _op(lambda x: getitem(x, (slice(None), slice(1, 3))) * 2.0, (2, 4))),
    GradcheckCase('concat', 'tensor', _op(lambda a, b: concat([a, b], axis=1), (1, 2, 3), (1, 1, 3))),
    GradcheckCase('matmul', 'tensor', _op(matmul, (2, 3, 4), (4, 5))),
    GradcheckCase('conv2d', 'tensor', _op(conv2d, (2, 3, 5, 4), (2, 3, 3, 3), (2,))),
    GradcheckCase('conv2d_stride', 'tensor', _op(lambda x, k: conv2d(x, k, stride=2, padding=1),
                                                 (1, 2, 5, 6), (3, 2, 3, 3))),
    GradcheckCase('dwconv2d', 'tensor', _op(dwconv2d, (2, 3, 5, 4), (3, 1, 5, 5), (3,))),
    GradcheckCase('layer_norm', 'tensor', _op(layer_norm, (2, 4, 3, 3), (4,), (4,))),
    GradcheckCase('pad2d_reflect', 'tensor', _op(lambda x: pad2d(x, PaddingSpec(1, 3, 2, 0, mode='reflect')),
                                                 (1, 2, 3, 3))),
    GradcheckCase('pad2d_zero', 'tensor', _op(lambda x: pad2d(x, PaddingSpec(1, 0, 2, 1)), (1, 2, 3, 3))),
    GradcheckCase('pixel_shuffle', 'tensor', _op(lambda x: pixel_shuffle(x, 2), (1, 8, 2, 3))),
    GradcheckCase('pixel_unshuffle', 'tensor', _op(lambda x: pixel_unshuffle(x, 2), (1, 2, 4, 6))),
    GradcheckCase('global_avg_pool', 'tensor', _op(global_avg_pool, (2, 3, 4, 5))),

    GradcheckCase('rfft2', 'fft', _rfft2(4, 8)),
    GradcheckCase('rfft2_odd', 'fft', _rfft2(5, 7)),
    GradcheckCase('irfft2', 'fft', _irfft2(4, 8)),
    GradcheckCase('irfft2_odd', 'fft', _irfft2(6, 5)),
    GradcheckCase('freq_loss', 'fft', _loss(freq_loss)),
    GradcheckCase('l1_loss', 'fft', _loss(l1_loss)),

    GradcheckCase('selective_scan', 'ssm', _scan),
    GradcheckCase('scan_with_params', 'ssm', _scan_params),
    GradcheckCase('ss2d', 'ssm', _ss2d),
    GradcheckCase('vssm', 'ssm', _module(lambda rng: VSSM(2, 2, rng, expand=1), 1, 2, 3, 4),
                  eps=1e-5, max_elements=8, floor=1e-7),

    GradcheckCase('channel_attention', 'blocks', _module(lambda rng: ChannelAttention(4, rng), 2, 4, 3, 3),
                  eps=1e-5, floor=1e-7),
    GradcheckCase('fftm', 'blocks', _module(lambda rng: FFTM(4, rng), 1, 4, 4, 6),
                  eps=1e-5, max_elements=8, floor=1e-7),
    GradcheckCase('ssb', 'blocks', _module(lambda rng: SSB(2, 2, rng, expand=1), 1, 2, 3, 4),
                  eps=1e-5, max_elements=8, floor=1e-7),
    GradcheckCase('fssb', 'blocks', _module(lambda rng: FSSB(2, 2, rng, expand=1), 1, 2, 3, 4),
                  eps=1e-5, max_elements=8, floor=1e-7),
    GradcheckCase('mgcb', 'blocks', _module(lambda rng: MGCB(4, rng), 1, 4, 4, 5),
                  eps=1e-5, max_elements=8, floor=1e-7),
    GradcheckCase('conv_layer', 'blocks', _module(lambda rng: ConvLayer(4, rng), 1, 4, 4, 5),
                  eps=1e-5, max_elements=8, floor=1e-7),

    GradcheckCase('micro_network', 'network', _network, eps=1e-5, max_elements=3, floor=1e-7),
]


def select_cases(module: str = 'all') -> List[GradcheckCase]:
    if module != 'all' and module not in SUITE_MODULES:
        raise ValueError(f'Unknown suite module {module!r}, one of {("all", *SUITE_MODULES)!r} expected.')
    return [case for case in CASES if module == 'all' or case.module == module]


def run_case(case: GradcheckCase, seed: int) -> Tuple[float, Optional[str]]:
    rng = rng_stream(seed, case.name)
    with precision(np.float64):
        fn, inputs, names = case.build(rng)
        result = gradcheck(fn, inputs, names=names, eps=case.eps, max_elements=case.max_elements,
                           rng=rng, floor=case.floor)
    return result.worst, result.worst_input


def run_suite(module: str = 'all', seeds: Sequence[int] = DEFAULT_SEEDS,
              tolerance: float = TOLERANCE) -> pd.DataFrame:
    """
    Run the selected cases under every seed.

    :returns: One row per case and seed with the worst relative error, the input it
        occurred on and whether it stays within ``tolerance``.
    """
    cases = select_cases(module)
    logging.info(f'Running {plural_word(len(cases), "gradient check")} '
                 f'with {plural_word(len(seeds), "seed")} at tolerance {tolerance!r}.')
    rows = []
    for case in cases:
        for seed in seeds:
            worst, where = run_case(case, seed)
            rows.append({
                'module': case.module,
                'case': case.name,
                'seed': seed,
                'worst_error': worst,
                'input': where,
                'passed': worst <= tolerance,
            })
            if worst > tolerance:
                logging.warning(f'Gradient check {case.name!r} failed under seed {seed!r}: '
                                f'error {worst:.3e} on {where!r}.')
    return pd.DataFrame(rows, columns=['module', 'case', 'seed', 'worst_error', 'input', 'passed'])


def summarize(report: pd.DataFrame) -> pd.DataFrame:
    return report.groupby(['module', 'case'], sort=False).agg(
        worst_error=('worst_error', 'max'),
        passed=('passed', 'all'),
    ).reset_index()
