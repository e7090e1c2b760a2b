import os

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from dfssm.data import PairDataset, make_dataset, read_manifest, write_manifest, format_manifest_line, \
    parse_manifest_line, RainParams, save_png, load_png, render_scene, MANIFEST_NAME, RAINY_DIR, CLEAN_DIR
from dfssm.errors import ConfigError, UsageError


@pytest.mark.unittest
class TestManifest:
    def test_line_format(self):
        params = RainParams(theta=12.5, length=9, rho=0.02, intensity=0.75, seed=7)
        line = format_manifest_line('0003.png', params)
        assert line == '0003.png theta=12.5 len=9 rho=0.02 intensity=0.75 seed=7'
        assert parse_manifest_line(line) == ('0003.png', params)

    def test_file(self, tmp_path):
        entries = {
            '0001.png': RainParams(theta=-3.25, seed=1),
            '0000.png': RainParams(theta=40.0, length=3, seed=0),
        }
        path = str(tmp_path / MANIFEST_NAME)
        write_manifest(path, entries)
        with open(path, 'r', encoding='utf-8') as f:
            assert [line.split()[0] for line in f] == ['0000.png', '0001.png']
        assert read_manifest(path) == entries

    def test_blank_lines_skipped(self, tmp_path):
        path = tmp_path / MANIFEST_NAME
        path.write_text('\n' + format_manifest_line('a.png', RainParams()) + '\n\n', encoding='utf-8')
        assert list(read_manifest(str(path))) == ['a.png']

    @pytest.mark.parametrize('line', [
        'a.png theta=1 len=3 rho=0.1 intensity=0.5',
        'a.png theta=1 len=3 rho=0.1 intensity=0.5 seed=1 extra=2',
        'a.png theta=1 len=3 rho=0.1 intensity=0.5 seed',
        'a.png theta=1 len=abc rho=0.1 intensity=0.5 seed=1',
    ])
    def test_malformed(self, line):
        with pytest.raises(ConfigError):
            parse_manifest_line(line)


@pytest.mark.unittest
class TestMakeDataset:
    def test_layout(self, tmp_path):
        root = str(tmp_path / 'data')
        entries = make_dataset(root, count=3, seed=10, size=16, max_workers=2)
        assert sorted(entries) == ['0000.png', '0001.png', '0002.png']
        assert [entries[name].seed for name in sorted(entries)] == [10, 11, 12]
        assert all(-45.0 <= p.theta <= 45.0 for p in entries.values())
        assert len({p.theta for p in entries.values()}) == 3

        for sub in (RAINY_DIR, CLEAN_DIR):
            assert sorted(os.listdir(os.path.join(root, sub))) == sorted(entries)
        assert read_manifest(os.path.join(root, MANIFEST_NAME)) == entries
        assert load_png(os.path.join(root, RAINY_DIR, '0000.png')).shape == (16, 16, 3)

    def test_deterministic(self, tmp_path):
        a = make_dataset(str(tmp_path / 'a'), count=2, seed=5, size=12, max_workers=1)
        b = make_dataset(str(tmp_path / 'b'), count=2, seed=5, size=12, max_workers=4)
        assert a == b
        for pa, pb in zip(PairDataset(str(tmp_path / 'a')), PairDataset(str(tmp_path / 'b'))):
            assert_array_equal(pa.rainy, pb.rainy)
            assert_array_equal(pa.clean, pb.clean)

    def test_fixed_angle(self, tmp_path):
        entries = make_dataset(str(tmp_path), count=2, theta=30.0, length=5, rho=0.05, size=12)
        assert {p.theta for p in entries.values()} == {30.0}
        assert {p.length for p in entries.values()} == {5}

    def test_clean_sources_cycle(self, tmp_path):
        sources = tmp_path / 'sources'
        for i in range(2):
            save_png(render_scene(10, 14, seed=100 + i), str(sources / f'{i}.png'))
        root = str(tmp_path / 'out')
        make_dataset(root, count=3, clean_dir=str(sources))
        clean = [load_png(os.path.join(root, CLEAN_DIR, f'{i:04d}.png')) for i in range(3)]
        assert_array_equal(clean[0], load_png(str(sources / '0.png')))
        assert_array_equal(clean[1], load_png(str(sources / '1.png')))
        assert_array_equal(clean[2], clean[0])

    def test_invalid(self, tmp_path):
        with pytest.raises(UsageError):
            make_dataset(str(tmp_path), count=0)
        os.makedirs(str(tmp_path / 'empty'))
        with pytest.raises(UsageError):
            make_dataset(str(tmp_path / 'x'), count=1, clean_dir=str(tmp_path / 'empty'))
        with pytest.raises(ConfigError):
            make_dataset(str(tmp_path / 'y'), count=1, theta=120.0)


@pytest.mark.unittest
class TestPairDataset:
    def test_access(self, tmp_path):
        entries = make_dataset(str(tmp_path), count=3, seed=1, size=12)
        dataset = PairDataset(str(tmp_path))
        assert len(dataset) == 3
        assert dataset.names == sorted(entries)

        pair = dataset[1]
        assert pair.name == '0001.png'
        assert pair.meta == entries['0001.png']
        assert pair.rainy.shape == pair.clean.shape == (12, 12, 3)

        loaded = dataset.load_all()
        assert [p.name for p in loaded] == dataset.names
        assert_array_equal(loaded[2].rainy, dataset[2].rainy)

    def test_without_manifest(self, tmp_path):
        make_dataset(str(tmp_path), count=1, size=8)
        os.remove(str(tmp_path / MANIFEST_NAME))
        assert PairDataset(str(tmp_path))[0].meta is None

    def test_missing_directories(self, tmp_path):
        os.makedirs(str(tmp_path / RAINY_DIR))
        with pytest.raises(UsageError):
            PairDataset(str(tmp_path))

    def test_empty(self, tmp_path):
        os.makedirs(str(tmp_path / RAINY_DIR))
        os.makedirs(str(tmp_path / CLEAN_DIR))
        with pytest.raises(UsageError):
            PairDataset(str(tmp_path))

    def test_unpaired(self, tmp_path):
        make_dataset(str(tmp_path), count=2, size=8)
        os.remove(str(tmp_path / CLEAN_DIR / '0001.png'))
        with pytest.raises(UsageError) as info:
            PairDataset(str(tmp_path))
        assert '0001.png' in str(info.value)

    def test_clean_images_are_valid(self, tmp_path):
        make_dataset(str(tmp_path), count=1, size=8, intensity=0.0)
        pair = PairDataset(str(tmp_path))[0]
        assert_array_equal(pair.rainy, pair.clean)
        assert pair.clean.dtype == np.uint8
