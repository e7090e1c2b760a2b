import pandas as pd

from .model import DFSSM, stage_plan
from ..tensor import Module

#: parameter counts reported for the two published variants, in millions
REFERENCE_PARAMS_M = {
    'dfssm': 19.0,
    'dfssm-s': 7.0,
}


def count_params(model: Module) -> int:
    return model.num_params()


def estimate_flops(model: Module, h: int, w: int) -> int:
    return model.flops(h, w)


def params_report(model: DFSSM, h: int = 256, w: int = 256) -> pd.DataFrame:
    """
    One row per top-level component with its level, width, group sequence,
    parameter count and GFLOPs at ``h×w``.
    """
    plans = {plan.name: plan for plan in stage_plan(model.cfg)}
    flops = dict(model.component_flops(h, w))
    params = {}
    for name, param in model.named_parameters():
        head = '.'.join(name.split('.')[:2]) if name.split('.')[0] in ('enc', 'dec', 'down', 'up', 'reduce') \
            else name.split('.')[0]
        params[head] = params.get(head, 0) + param.size

    rows = []
    for name, value in flops.items():
        plan = plans.get(name)
        rows.append({
            'component': name,
            'level': plan.level if plan else None,
            'width': plan.width if plan else None,
            'groups': '+'.join(plan.groups) if plan else '',
            'params': params.get(name, 0),
            'gflops': value / 1e9,
        })
    df = pd.DataFrame(rows)
    df['level'] = df['level'].astype('Int64')
    df['width'] = df['width'].astype('Int64')
    assert df['params'].sum() == count_params(model), \
        f'Report covers {df["params"].sum()!r} of {count_params(model)!r} parameters.'
    return df
