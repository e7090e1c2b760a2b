"""
The DFSSM U-Net.

Encoder stages run at levels ``1..L`` with widths ``C·2^(l-1)``; every step down is
a pixel-unshuffle followed by a 1×1 conv doubling the width, every step up a 1×1
conv followed by a pixel-shuffle halving it. Decoder stages concatenate the
encoder skip of their level and, below the top level, halve the width again with
a 1×1 conv. The top decoder stage and the refinement stage run at ``2C``; a 3×3
head maps back to RGB and the input image is added on top.
"""
from dataclasses import dataclass
from typing import List, Tuple, Optional

import numpy as np

from ..blocks import StateSpaceGroup
from ..config import ModelConfig
from ..errors import DimensionError
from ..tensor import Tensor, Module, ModuleList, Conv2d, PaddingSpec, pad2d, crop2d, pixel_shuffle, \
    pixel_unshuffle, concat
from ..utils import rng_stream

SCALE = 2


@dataclass(frozen=True)
class StagePlan:
    name: str
    level: int
    width: int
    groups: Tuple[str, ...]


def stage_plan(cfg: ModelConfig) -> List[StagePlan]:
    """
    Name, level (1 = full resolution), width and group sequence of every stage.
    """
    c = cfg.channels
    groups = ('ssg',) * cfg.n_s + ('fssg',) * cfg.n_f
    plans = [StagePlan(f'enc.{i}', i + 1, c * 2 ** i, groups) for i in range(cfg.levels)]
    for i, level in enumerate(range(cfg.levels - 1, 0, -1)):
        width = c * 2 ** (level - 1) if level > 1 else 2 * c
        plans.append(StagePlan(f'dec.{i}', level, width, groups))
    plans.append(StagePlan('refine', 1, 2 * c, groups))
    return plans


class Stage(Module):
    """
    ``n_s`` state space groups followed by ``n_f`` frequency-enhanced ones.
    """

    def __init__(self, channels: int, cfg: ModelConfig, rng: np.random.Generator):
        options = dict(
            expand=cfg.expand, gamma=cfg.gamma, conv_block=cfg.conv_block,
            fftm_use_fft=cfg.fftm_use_fft, fftm_spatial_convs=cfg.fftm_spatial_convs,
            chunk=cfg.scan_chunk or None,
        )
        self.channels = channels
        self.ssg = ModuleList([
            StateSpaceGroup(channels, cfg.state_dim, rng, frequency=False, **options) for _ in range(cfg.n_s)
        ])
        self.fssg = ModuleList([
            StateSpaceGroup(channels, cfg.state_dim, rng, frequency=True, **options) for _ in range(cfg.n_f)
        ])

    def forward(self, x: Tensor) -> Tensor:
        for group in self.ssg:
            x = group(x)
        for group in self.fssg:
            x = group(x)
        return x


class DFSSM(Module):
    def __init__(self, cfg: ModelConfig, rng: np.random.Generator):
        self.cfg = cfg
        c, levels = cfg.channels, cfg.levels
        widths = [c * 2 ** i for i in range(levels)]

        self.embed = Conv2d(3, c, 3, rng, bias=True)
        self.enc = ModuleList([Stage(widths[i], cfg, rng) for i in range(levels)])
        self.down = ModuleList([
            Conv2d(widths[i] * SCALE * SCALE, widths[i + 1], 1, rng, bias=False) for i in range(levels - 1)
        ])

        ups, reduces, decs = [], [], []
        for level in range(levels - 2, -1, -1):
            ups.append(Conv2d(widths[level + 1], widths[level] * SCALE * SCALE, 1, rng, bias=False))
            if level > 0:
                reduces.append(Conv2d(2 * widths[level], widths[level], 1, rng, bias=False))
                decs.append(Stage(widths[level], cfg, rng))
            else:
                decs.append(Stage(2 * c, cfg, rng))
        self.up = ModuleList(ups)
        self.reduce = ModuleList(reduces)
        self.dec = ModuleList(decs)

        self.refine = Stage(2 * c, cfg, rng)
        self.head = Conv2d(2 * c, 3, 3, rng, bias=True)

    @property
    def levels(self) -> int:
        return self.cfg.levels

    def padding_for(self, h: int, w: int) -> PaddingSpec:
        m = self.cfg.pad_multiple
        return PaddingSpec(0, (-h) % m, 0, (-w) % m, mode='reflect')

    def forward(self, image: Tensor) -> Tensor:
        if image.ndim != 4 or image.shape[1] != 3:
            raise DimensionError(f'Expected an RGB batch (n, 3, h, w), but shape {image.shape!r} found.')
        n, _, h, w = image.shape
        if n == 0 or h == 0 or w == 0:
            raise DimensionError(f'Cannot restore an empty image batch of shape {image.shape!r}.')
        x = pad2d(image, self.padding_for(h, w))

        feat = self.embed(x)
        skips = []
        for level in range(self.levels):
            feat = self.enc[level](feat)
            if level < self.levels - 1:
                skips.append(feat)
                feat = self.down[level](pixel_unshuffle(feat, SCALE))

        for i, level in enumerate(range(self.levels - 2, -1, -1)):
            feat = pixel_shuffle(self.up[i](feat), SCALE)
            feat = concat([feat, skips[level]], axis=1)
            if level > 0:
                feat = self.reduce[i](feat)
            feat = self.dec[i](feat)

        out = self.head(self.refine(feat)) + x
        return crop2d(out, h, w)

    def component_flops(self, h: int, w: int) -> List[Tuple[str, int]]:
        pad = self.padding_for(h, w)
        h, w = h + pad.bottom, w + pad.right

        def size(level):
            return h // SCALE ** level, w // SCALE ** level

        rows = [('embed', self.embed.flops(h, w))]
        for level in range(self.levels):
            rows.append((f'enc.{level}', self.enc[level].flops(*size(level))))
            if level < self.levels - 1:
                rows.append((f'down.{level}', self.down[level].flops(*size(level + 1))))
        for i, level in enumerate(range(self.levels - 2, -1, -1)):
            rows.append((f'up.{i}', self.up[i].flops(*size(level + 1))))
            if level > 0:
                rows.append((f'reduce.{i}', self.reduce[i].flops(*size(level))))
            rows.append((f'dec.{i}', self.dec[i].flops(*size(level))))
        rows.append(('refine', self.refine.flops(h, w)))
        rows.append(('head', self.head.flops(h, w)))
        return rows

    def flops(self, h: int, w: int) -> int:
        return sum(value for _, value in self.component_flops(h, w))


def build_model(cfg: ModelConfig, seed: int = 0, rng: Optional[np.random.Generator] = None) -> DFSSM:
    cfg.validate()
    rng = rng if rng is not None else rng_stream(seed, 'init')
    return DFSSM(cfg, rng).assign_names()
