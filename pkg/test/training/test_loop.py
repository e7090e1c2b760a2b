import os
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_array_equal

from dfssm.config import TrainConfig, get_preset, load_config
from dfssm.data import RainParams, synth_rain, render_scene, to_float
from dfssm.errors import NumericError, UsageError
from dfssm.network import build_model, load_checkpoint
from dfssm.training import train_loop, sample_batch, checkpoint_name, METRICS_NAME, METRICS_COLUMNS, LATEST_NAME, \
    NAN_DUMP_NAME


def _pairs(count=3, size=16):
    return [
        synth_rain(render_scene(size, size, seed=i), RainParams(theta=10.0 * i, length=5, rho=0.05, seed=i),
                   name=f'{i:04d}.png')
        for i in range(count)
    ]


def _config(**kwargs):
    base = dict(iterations=2, batch_size=2, patch_size=8, log_every=1, seed=0)
    base.update(kwargs)
    return TrainConfig(**base)


@pytest.mark.unittest
class TestSampleBatch:
    def test_shapes_and_replay(self):
        arrays = [(to_float(p.rainy), to_float(p.clean)) for p in _pairs()]
        cfg = _config(batch_size=3)
        batch = sample_batch(arrays, cfg, 5)
        assert batch.rainy.shape == batch.clean.shape == (3, 3, 8, 8)
        assert batch.rainy.dtype == np.float32
        assert len(batch.indices) == len(batch.decisions) == 3

        again = sample_batch(arrays, cfg, 5)
        assert again.indices == batch.indices and again.decisions == batch.decisions
        assert_array_equal(again.rainy, batch.rainy)

        other = sample_batch(arrays, cfg, 6)
        assert (other.indices, other.decisions) != (batch.indices, batch.decisions)

    def test_checkpoint_name(self):
        assert checkpoint_name(42) == 'iter_000042.ckpt'


@pytest.mark.unittest
class TestTrainLoop:
    def test_zero_iterations(self, tmp_path):
        model = build_model(get_preset('micro'), seed=0)
        initial = model.state_dict()
        result = train_loop(model, _pairs(), _config(iterations=0), str(tmp_path))

        assert result.checkpoint == os.path.join(str(tmp_path), LATEST_NAME)
        saved = load_checkpoint(result.checkpoint)
        for name, value in initial.items():
            assert_array_equal(saved[name], value, err_msg=name)
        assert len(result.metrics) == 0
        assert pd.read_csv(result.metrics_path).columns.tolist() == METRICS_COLUMNS

        model_cfg, train_cfg = load_config(os.path.join(str(tmp_path), 'config.cfg'))
        assert model_cfg == get_preset('micro')
        assert train_cfg.iterations == 0

    def test_metrics_and_checkpoints(self, tmp_path):
        model = build_model(get_preset('micro'), seed=0)
        result = train_loop(model, _pairs(), _config(iterations=4, log_every=3, checkpoint_every=2), str(tmp_path))

        df = pd.read_csv(os.path.join(str(tmp_path), METRICS_NAME))
        assert df['iter'].tolist() == [3, 4]
        assert np.isfinite(df[['loss_total', 'loss_l1', 'loss_freq', 'psnr_val']].to_numpy()).all()
        assert (df['loss_total'] >= df['loss_l1']).all()
        assert df['lr'].iloc[0] > df['lr'].iloc[1]
        assert result.metrics['iter'].tolist() == [3, 4]

        for it in (2, 4):
            assert os.path.exists(os.path.join(str(tmp_path), checkpoint_name(it)))
        assert not os.path.exists(os.path.join(str(tmp_path), checkpoint_name(3)))
        final = load_checkpoint(result.checkpoint)
        assert all(np.array_equal(final[name], p.data) for name, p in model.named_parameters())

    def test_parameters_move(self, tmp_path):
        model = build_model(get_preset('micro'), seed=0)
        before = model.state_dict()
        train_loop(model, _pairs(), _config(iterations=1), str(tmp_path))
        assert any(not np.array_equal(before[name], p.data) for name, p in model.named_parameters())

    def test_replayable(self, tmp_path):
        states = []
        for run in ('a', 'b'):
            model = build_model(get_preset('micro'), seed=3)
            result = train_loop(model, _pairs(), _config(iterations=2, seed=3), str(tmp_path / run))
            states.append(load_checkpoint(result.checkpoint))
        for name in states[0]:
            assert_array_equal(states[0][name], states[1][name], err_msg=name)

    def test_frequency_loss_disabled_by_model(self, tmp_path):
        cfg = replace(get_preset('micro'), use_freq_loss=False)
        model = build_model(cfg, seed=0)
        result = train_loop(model, _pairs(), _config(lambda_f=0.5), str(tmp_path))
        np.testing.assert_allclose(result.metrics['loss_total'], result.metrics['loss_l1'])
        assert (result.metrics['loss_freq'] > 0).all()

    def test_divergence_dump(self, tmp_path):
        model = build_model(get_preset('micro'), seed=0)
        model.head.bias.data[...] = np.nan
        with pytest.raises(NumericError):
            train_loop(model, _pairs(), _config(seed=11), str(tmp_path))

        with open(os.path.join(str(tmp_path), NAN_DUMP_NAME), 'r', encoding='utf-8') as f:
            lines = f.read().splitlines()
        assert 'iteration = 0' in lines
        assert 'seed = 11' in lines
        assert 'stream = augment/0' in lines
        assert sum(line.startswith('crop ') for line in lines) == 2
        assert not os.path.exists(os.path.join(str(tmp_path), LATEST_NAME))

    def test_empty_dataset(self, tmp_path):
        with pytest.raises(UsageError):
            train_loop(build_model(get_preset('micro')), [], _config(), str(tmp_path))

    def test_holdout(self, tmp_path):
        model = build_model(get_preset('micro'), seed=0)
        result = train_loop(model, _pairs(2), _config(iterations=1, holdout=True), str(tmp_path))
        assert len(result.metrics) == 1


@pytest.mark.slow
class TestTrainingProgress:
    def test_loss_decreases(self, tmp_path):
        model = build_model(get_preset('micro'), seed=0)
        pairs = _pairs(count=2)
        cfg = _config(iterations=60, batch_size=2, patch_size=16, log_every=10, lr_init=2e-3)
        df = train_loop(model, pairs, cfg, str(tmp_path)).metrics
        assert df['loss_l1'].iloc[-1] < df['loss_l1'].iloc[0]
