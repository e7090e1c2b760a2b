import zlib

import numpy as np

STREAMS = ('init', 'data', 'augment')


def rng_stream(seed: int, name: str, *index: int) -> np.random.Generator:
    """
    Independent generator for the named sub-stream of ``seed``.

    Components seeded from the same ``seed`` but different names (or indices) never
    share draws, so each one can be replayed in isolation.
    """
    entropy = [int(seed) & 0xFFFFFFFF, zlib.crc32(name.encode('utf-8')), *(int(i) for i in index)]
    return np.random.default_rng(np.random.SeedSequence(entropy))
