"""
On-disk pair datasets.

Layout::

    root/rainy/NNNN.png
    root/clean/NNNN.png
    root/manifest.txt       # NNNN.png theta=<f> len=<i> rho=<f> intensity=<f> seed=<u64>

Rainy and clean images are matched by filename.
"""
import glob
import os
from typing import Dict, List, Optional, Iterator, Tuple

import numpy as np
from ditk import logging
from hbutils.string import plural_word

from .image import load_png, save_png
from .rain import RainParams, ImagePair, synth_rain
from .scene import render_scene
from ..errors import UsageError, ConfigError
from ..utils import parallel_call, rng_stream

RAINY_DIR = 'rainy'
CLEAN_DIR = 'clean'
MANIFEST_NAME = 'manifest.txt'
#: streak angle range used when no fixed angle is requested
THETA_SAMPLE_RANGE = (-45.0, 45.0)


def format_manifest_line(name: str, params: RainParams) -> str:
    return f'{name} theta={float(params.theta)!r} len={int(params.length)} ' \
           f'rho={float(params.rho)!r} intensity={float(params.intensity)!r} seed={int(params.seed)}'


def parse_manifest_line(line: str, source: str = '<manifest>', lineno: int = 0) -> Tuple[str, RainParams]:
    name, *fields = line.split()
    values = {}
    for field in fields:
        key, sep, value = field.partition('=')
        if not sep:
            raise ConfigError(f'Malformed manifest field {field!r} at {source}:{lineno}.')
        values[key] = value
    expected = {'theta', 'len', 'rho', 'intensity', 'seed'}
    if set(values) != expected:
        raise ConfigError(f'Manifest line at {source}:{lineno} must define {sorted(expected)!r}, '
                          f'but {sorted(values)!r} found.')
    try:
        params = RainParams(
            theta=float(values['theta']),
            length=int(values['len']),
            rho=float(values['rho']),
            intensity=float(values['intensity']),
            seed=int(values['seed']),
        )
    except ValueError as err:
        raise ConfigError(f'Invalid manifest value at {source}:{lineno} - {err}') from err
    return name, params


def write_manifest(path: str, entries: Dict[str, RainParams]):
    with open(path, 'w', encoding='utf-8') as f:
        for name in sorted(entries):
            print(format_manifest_line(name, entries[name]), file=f)


def read_manifest(path: str) -> Dict[str, RainParams]:
    entries = {}
    with open(path, 'r', encoding='utf-8') as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            name, params = parse_manifest_line(line, path, lineno)
            entries[name] = params
    return entries


def _png_names(directory: str) -> List[str]:
    return sorted(os.path.basename(p) for p in glob.glob(os.path.join(directory, '*.png')))


class PairDataset:
    """
    Rainy/clean pairs under ``root``, loaded on access.

    :param root: Dataset directory holding ``rainy/`` and ``clean/``.
    :raises UsageError: When the directories are missing, empty or their filenames differ.
    """

    def __init__(self, root: str):
        self.root = root
        rainy_dir, clean_dir = os.path.join(root, RAINY_DIR), os.path.join(root, CLEAN_DIR)
        if not os.path.isdir(rainy_dir) or not os.path.isdir(clean_dir):
            raise UsageError(f'Dataset {root!r} must contain {RAINY_DIR!r} and {CLEAN_DIR!r} directories.')

        rainy, clean = _png_names(rainy_dir), _png_names(clean_dir)
        if rainy != clean:
            missing = sorted(set(rainy) ^ set(clean))
            raise UsageError(f'Rainy and clean images of {root!r} do not match, '
                             f'first unpaired file is {missing[0]!r}.')
        if not rainy:
            raise UsageError(f'Dataset {root!r} is empty.')
        self.names = rainy

        manifest_path = os.path.join(root, MANIFEST_NAME)
        self.manifest = read_manifest(manifest_path) if os.path.exists(manifest_path) else {}
        logging.info(f'Dataset {root!r} opened, {plural_word(len(self.names), "pair")} found.')

    def __len__(self) -> int:
        return len(self.names)

    def __getitem__(self, index: int) -> ImagePair:
        name = self.names[index]
        return ImagePair(
            rainy=load_png(os.path.join(self.root, RAINY_DIR, name)),
            clean=load_png(os.path.join(self.root, CLEAN_DIR, name)),
            meta=self.manifest.get(name),
            name=name,
        )

    def __iter__(self) -> Iterator[ImagePair]:
        for i in range(len(self)):
            yield self[i]

    def load_all(self) -> List[ImagePair]:
        return parallel_call(range(len(self)), self.__getitem__, desc=f'Loading {self.root!r}')


def _clean_sources(clean_dir: Optional[str]) -> List[str]:
    files = sorted(glob.glob(os.path.join(clean_dir, '*.png')))
    if not files:
        raise UsageError(f'No PNG images found in clean directory {clean_dir!r}.')
    return files


def make_dataset(out: str, count: int, seed: int = 0, theta: Optional[float] = None, length: int = 15,
                 rho: float = 0.01, intensity: float = 0.6, clean_dir: Optional[str] = None,
                 size: int = 64, max_workers: Optional[int] = None) -> Dict[str, RainParams]:
    """
    Generate ``count`` synthetic pairs under ``out``.

    Pair ``i`` uses rain seed ``seed + i``; its clean image is the ``i``-th source of
    ``clean_dir`` (cycled) or, without ``clean_dir``, a procedural scene of
    ``size × size`` pixels. With ``theta`` unset every pair draws its own angle from the
    ``data`` stream. Output does not depend on worker scheduling.

    :returns: Manifest entries by filename.
    """
    if count <= 0:
        raise UsageError(f'Pair count must be positive, but {count!r} found.')
    sources = _clean_sources(clean_dir) if clean_dir is not None else None

    def _params(i: int) -> RainParams:
        angle = theta
        if angle is None:
            angle = float(rng_stream(seed, 'data', i, 0).uniform(*THETA_SAMPLE_RANGE))
        return RainParams(theta=angle, length=length, rho=rho, intensity=intensity, seed=seed + i).validate()

    plans = [(i, f'{i:04d}.png', _params(i)) for i in range(count)]
    os.makedirs(os.path.join(out, RAINY_DIR), exist_ok=True)
    os.makedirs(os.path.join(out, CLEAN_DIR), exist_ok=True)

    def _make(plan):
        i, name, params = plan
        if sources is not None:
            clean = load_png(sources[i % len(sources)])
        else:
            scene_seed = int(rng_stream(seed, 'data', i, 1).integers(0, np.iinfo(np.int64).max))
            clean = render_scene(size, size, scene_seed)
        pair = synth_rain(clean, params, name=name)
        save_png(pair.rainy, os.path.join(out, RAINY_DIR, name))
        save_png(pair.clean, os.path.join(out, CLEAN_DIR, name))

    parallel_call(plans, _make, desc=f'Generating pairs into {out!r}', max_workers=max_workers)
    entries = {name: params for _, name, params in plans}
    write_manifest(os.path.join(out, MANIFEST_NAME), entries)
    logging.info(f'{plural_word(count, "pair")} written to {out!r}.')
    return entries
