from typing import Iterable, Optional

import numpy as np
import pandas as pd
from tqdm import tqdm

from .model import DFSSM
from ..data import ImagePair, psnr_y, ssim_y, to_float, to_uint8
from ..tensor import Tensor, no_grad


def derain(model: DFSSM, image: np.ndarray) -> np.ndarray:
    with no_grad():
        out = model(Tensor(to_float(image)[None]))
    return to_uint8(out.data[0])


def evaluate_pairs(pairs: Iterable[ImagePair], model: Optional[DFSSM] = None,
                   total: Optional[int] = None) -> pd.DataFrame:
    """
    Y-channel PSNR and SSIM per pair. Without a model the rainy inputs are scored
    as they are, which gives the baseline of a dataset.
    """
    rows = []
    for pair in tqdm(pairs, total=total, desc='Evaluating'):
        restored = pair.rainy if model is None else derain(model, pair.rainy)
        rows.append({
            'name': pair.name,
            'psnr': psnr_y(restored, pair.clean),
            'ssim': ssim_y(restored, pair.clean),
        })
    return pd.DataFrame(rows, columns=['name', 'psnr', 'ssim'])
