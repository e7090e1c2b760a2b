"""
Single-process training loop.

Every iteration draws its batch from the ``augment`` stream of ``(seed, iteration)``,
so a run is replayable from the seed alone and any iteration can be reproduced in
isolation.
"""
import os
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd
from ditk import logging
from hbutils.string import plural_word
from tqdm import tqdm

from .augment import sample_augment, apply_augment, AugmentDecision
from .losses import compute_losses
from .optim import AdamW, cosine_lr
from ..config import TrainConfig, save_config
from ..data import ImagePair, psnr_y, to_float
from ..errors import UsageError, NumericError
from ..network import DFSSM, save_checkpoint, derain, CONFIG_NAME
from ..tensor import Tensor, checked
from ..utils import rng_stream

METRICS_NAME = 'metrics.csv'
METRICS_COLUMNS = ['iter', 'loss_total', 'loss_l1', 'loss_freq', 'lr', 'psnr_val']
LATEST_NAME = 'latest.ckpt'
NAN_DUMP_NAME = 'nan_dump.txt'


def checkpoint_name(iteration: int) -> str:
    return f'iter_{iteration:06d}.ckpt'


@dataclass
class Batch:
    iteration: int
    indices: List[int]
    decisions: List[AugmentDecision]
    rainy: np.ndarray
    clean: np.ndarray


def sample_batch(pairs: Sequence[Tuple[np.ndarray, np.ndarray]], cfg: TrainConfig, iteration: int) -> Batch:
    rng = rng_stream(cfg.seed, 'augment', iteration)
    indices = [int(i) for i in rng.integers(0, len(pairs), size=cfg.batch_size)]
    decisions, rainy, clean = [], [], []
    for index in indices:
        x, y = pairs[index]
        decision = sample_augment(rng, x.shape[-2], x.shape[-1], cfg.patch_size)
        decisions.append(decision)
        rainy.append(apply_augment(x, decision))
        clean.append(apply_augment(y, decision))
    return Batch(iteration, indices, decisions, np.stack(rainy), np.stack(clean))


def write_nan_dump(path: str, batch: Batch, cfg: TrainConfig, reason: str):
    with open(path, 'w', encoding='utf-8') as f:
        print(f'reason = {reason}', file=f)
        print(f'iteration = {batch.iteration}', file=f)
        print(f'seed = {cfg.seed}', file=f)
        print(f'stream = augment/{batch.iteration}', file=f)
        print(f'indices = {" ".join(map(str, batch.indices))}', file=f)
        for d in batch.decisions:
            print(f'crop top={d.top} left={d.left} size={d.size} hflip={d.hflip} vflip={d.vflip}', file=f)


@dataclass
class TrainResult:
    checkpoint: str
    metrics: pd.DataFrame
    metrics_path: str


def _split_pairs(pairs: Sequence[ImagePair], holdout: bool) -> Tuple[Sequence[ImagePair], ImagePair]:
    if holdout:
        if len(pairs) > 1:
            return pairs[:-1], pairs[-1]
        logging.warning('Only one pair available, holdout disabled.')
    return pairs, pairs[0]


def train_loop(model: DFSSM, pairs: Sequence[ImagePair], cfg: TrainConfig, out_dir: str) -> TrainResult:
    """
    Train ``model`` in place on ``pairs``.

    Each iteration samples a batch, augments it, runs the forward pass in checked mode,
    back-propagates ``l1 + λ_f·freq`` and applies AdamW at the cosine learning rate.
    Metrics go to ``metrics.csv``, checkpoints to ``iter_NNNNNN.ckpt`` every
    ``cfg.checkpoint_every`` iterations and to ``latest.ckpt`` at the end, with the
    resolved config beside them as ``config.cfg``.

    :raises UsageError: When ``pairs`` is empty.
    :raises NumericError: On a non-finite loss or gradient, after ``nan_dump.txt`` is written.
    """
    cfg.validate()
    if len(pairs) == 0:
        raise UsageError('Cannot train on an empty dataset.')
    os.makedirs(out_dir, exist_ok=True)
    save_config(os.path.join(out_dir, CONFIG_NAME), model.cfg, cfg)

    train_pairs, val_pair = _split_pairs(list(pairs), cfg.holdout)
    arrays = [(to_float(p.rainy), to_float(p.clean)) for p in train_pairs]
    lambda_f = cfg.lambda_f if model.cfg.use_freq_loss else 0.0
    optimizer = AdamW(model.parameters(), cfg)
    metrics_path = os.path.join(out_dir, METRICS_NAME)
    rows = []

    def _flush():
        pd.DataFrame(rows, columns=METRICS_COLUMNS).to_csv(metrics_path, index=False)

    logging.info(f'Training {plural_word(model.num_params(), "parameter")} on '
                 f'{plural_word(len(train_pairs), "pair")} for {plural_word(cfg.iterations, "iteration")}, '
                 f'lambda_f={lambda_f!r}.')
    _flush()
    progress = tqdm(range(cfg.iterations), desc='Training')
    for it in progress:
        batch = sample_batch(arrays, cfg, it)
        lr = cosine_lr(it, cfg.iterations, cfg.lr_init, cfg.lr_final)
        optimizer.zero_grad()
        try:
            with checked():
                pred = model(Tensor(batch.rainy))
                terms = compute_losses(pred, Tensor(batch.clean), lambda_f)
                terms.total.backward()
        except NumericError as err:
            _abort(out_dir, batch, cfg, str(err))
        if any(p.grad is not None and not np.all(np.isfinite(p.grad)) for p in optimizer.params):
            _abort(out_dir, batch, cfg, 'non-finite gradient')
        optimizer.step(lr)

        total, l1, freq = terms.as_floats()
        progress.set_postfix(loss=f'{total:.4f}', lr=f'{lr:.2e}')
        done = it + 1
        if done % cfg.log_every == 0 or done == cfg.iterations:
            psnr_val = psnr_y(derain(model, val_pair.rainy), val_pair.clean)
            rows.append([done, total, l1, freq, lr, psnr_val])
            _flush()
            logging.info(f'Iteration {done!r}: loss={total:.6f} (l1={l1:.6f}, freq={freq:.6f}), '
                         f'lr={lr:.3e}, psnr_val={psnr_val:.3f}.')
        if cfg.checkpoint_every and done % cfg.checkpoint_every == 0:
            save_checkpoint(model, os.path.join(out_dir, checkpoint_name(done)))

    latest = os.path.join(out_dir, LATEST_NAME)
    save_checkpoint(model, latest)
    return TrainResult(checkpoint=latest, metrics=pd.DataFrame(rows, columns=METRICS_COLUMNS),
                       metrics_path=metrics_path)


def _abort(out_dir: str, batch: Batch, cfg: TrainConfig, reason: str):
    dump = os.path.join(out_dir, NAN_DUMP_NAME)
    write_nan_dump(dump, batch, cfg, reason)
    logging.error(f'Training diverged at iteration {batch.iteration!r} ({reason}), batch written to {dump!r}.')
    raise NumericError(f'Training diverged at iteration {batch.iteration!r}: {reason}')

