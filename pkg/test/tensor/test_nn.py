import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from scipy.signal import correlate2d

from dfssm.errors import DimensionError
from dfssm.tensor import Tensor, conv2d, dwconv2d, layer_norm, pixel_shuffle, pixel_unshuffle, global_avg_pool, \
    PaddingSpec, gradcheck


def _reference_conv(x: np.ndarray, w: np.ndarray, pad: int) -> np.ndarray:
    xp = np.pad(x, [(0, 0), (0, 0), (pad, pad), (pad, pad)])
    n, ci = x.shape[:2]
    co = w.shape[0]
    out = []
    for b in range(n):
        out.append([sum(correlate2d(xp[b, c], w[o, c], mode='valid') for c in range(ci)) for o in range(co)])
    return np.asarray(out)


@pytest.mark.unittest
class TestConv:
    def test_conv2d_matches_correlation(self, rng, f64):
        x = rng.standard_normal((2, 3, 7, 6))
        w = rng.standard_normal((4, 3, 3, 3))
        b = rng.standard_normal(4)
        out = conv2d(Tensor(x), Tensor(w), Tensor(b))
        assert out.shape == (2, 4, 7, 6)
        assert_allclose(out.data, _reference_conv(x, w, 1) + b[None, :, None, None], atol=1e-10)

    def test_conv2d_stride(self, rng, f64):
        x = rng.standard_normal((1, 2, 8, 8))
        w = rng.standard_normal((3, 2, 4, 4))
        out = conv2d(Tensor(x), Tensor(w), stride=2, padding=1)
        assert out.shape == (1, 3, 4, 4)
        assert_allclose(out.data, _reference_conv(x, w, 1)[..., ::2, ::2], atol=1e-10)

    def test_conv2d_pointwise(self, rng, f64):
        x = rng.standard_normal((2, 3, 4, 5))
        w = rng.standard_normal((6, 3, 1, 1))
        out = conv2d(Tensor(x), Tensor(w))
        assert_allclose(out.data, np.einsum('nchw,oc->nohw', x, w[:, :, 0, 0]), atol=1e-10)

    def test_dwconv2d_matches_correlation(self, rng, f64):
        x = rng.standard_normal((1, 3, 6, 6))
        w = rng.standard_normal((3, 1, 5, 5))
        out = dwconv2d(Tensor(x), Tensor(w))
        xp = np.pad(x, [(0, 0), (0, 0), (2, 2), (2, 2)])
        expected = np.stack([correlate2d(xp[0, c], w[c, 0], mode='valid') for c in range(3)])[None]
        assert_allclose(out.data, expected, atol=1e-10)

    def test_reflect_padding_preserves_constant(self, f64):
        x = Tensor(np.full((1, 1, 4, 4), 2.0))
        w = Tensor(np.ones((1, 1, 3, 3)))
        out = conv2d(x, w, padding=PaddingSpec.same(3, mode='reflect'))
        assert_allclose(out.data, 18.0)

    def test_channel_mismatch(self, rng):
        with pytest.raises(DimensionError):
            conv2d(Tensor(rng.standard_normal((1, 2, 4, 4))), Tensor(rng.standard_normal((1, 3, 3, 3))))

    def test_kernel_too_large(self, rng):
        with pytest.raises(DimensionError):
            conv2d(Tensor(rng.standard_normal((1, 1, 2, 2))), Tensor(rng.standard_normal((1, 1, 5, 5))), padding=0)

    def test_rank_check(self, rng):
        with pytest.raises(DimensionError):
            dwconv2d(Tensor(rng.standard_normal((3, 4, 4))), Tensor(rng.standard_normal((3, 1, 3, 3))))

    @pytest.mark.parametrize('stride', [1, 2])
    def test_conv2d_gradients(self, rng, f64, stride):
        x = Tensor(rng.standard_normal((1, 2, 6, 6)), requires_grad=True)
        w = Tensor(rng.standard_normal((3, 2, 3, 3)), requires_grad=True)
        b = Tensor(rng.standard_normal(3), requires_grad=True)
        result = gradcheck(lambda x_, w_, b_: conv2d(x_, w_, b_, stride=stride), [x, w, b], rng=rng)
        assert result.passed(1e-6), result.errors

    def test_dwconv2d_gradients(self, rng, f64):
        x = Tensor(rng.standard_normal((2, 2, 5, 5)), requires_grad=True)
        w = Tensor(rng.standard_normal((2, 1, 3, 3)), requires_grad=True)
        b = Tensor(rng.standard_normal(2), requires_grad=True)
        result = gradcheck(dwconv2d, [x, w, b], rng=rng)
        assert result.passed(1e-6), result.errors


@pytest.mark.unittest
class TestLayerNorm:
    def test_normalizes_channels(self, rng, f64):
        x = rng.standard_normal((2, 5, 3, 3)) * 4 + 1
        out = layer_norm(Tensor(x), Tensor(np.ones(5)), Tensor(np.zeros(5))).data
        assert_allclose(out.mean(axis=1), 0, atol=1e-10)
        assert_allclose(out.var(axis=1), 1, atol=1e-4)

    def test_affine(self, rng, f64):
        x = rng.standard_normal((1, 3, 2, 2))
        gamma, beta = np.array([1.0, 2.0, 3.0]), np.array([0.5, 0.0, -0.5])
        plain = layer_norm(Tensor(x), Tensor(np.ones(3)), Tensor(np.zeros(3))).data
        out = layer_norm(Tensor(x), Tensor(gamma), Tensor(beta)).data
        assert_allclose(out, plain * gamma[None, :, None, None] + beta[None, :, None, None], atol=1e-12)

    def test_affine_shape_mismatch(self, rng):
        with pytest.raises(DimensionError):
            layer_norm(Tensor(rng.standard_normal((1, 3, 2, 2))), Tensor(np.ones(2)), Tensor(np.zeros(2)))

    def test_gradients(self, rng, f64):
        x = Tensor(rng.standard_normal((2, 4, 3, 3)), requires_grad=True)
        gamma = Tensor(rng.uniform(0.5, 1.5, 4), requires_grad=True)
        beta = Tensor(rng.standard_normal(4), requires_grad=True)
        result = gradcheck(layer_norm, [x, gamma, beta], rng=rng)
        assert result.passed(1e-5), result.errors


@pytest.mark.unittest
class TestPixelShuffle:
    def test_unshuffle_mapping(self, rng):
        x = rng.standard_normal((1, 2, 4, 6))
        out = pixel_unshuffle(Tensor(x), 2).data
        assert out.shape == (1, 8, 2, 3)
        for c in range(2):
            for dy in range(2):
                for dx in range(2):
                    assert_array_equal(out[0, c * 4 + dy * 2 + dx], x[0, c, dy::2, dx::2])

    def test_inverse(self, rng):
        x = rng.standard_normal((2, 3, 6, 4))
        assert_array_equal(pixel_shuffle(pixel_unshuffle(Tensor(x), 2), 2).data, x)
        y = rng.standard_normal((1, 8, 3, 3))
        assert_array_equal(pixel_unshuffle(pixel_shuffle(Tensor(y), 2), 2).data, y)

    def test_indivisible(self, rng):
        with pytest.raises(DimensionError):
            pixel_unshuffle(Tensor(rng.standard_normal((1, 1, 5, 4))), 2)
        with pytest.raises(DimensionError):
            pixel_shuffle(Tensor(rng.standard_normal((1, 6, 2, 2))), 2)

    def test_global_avg_pool(self, rng):
        x = rng.standard_normal((2, 3, 4, 5))
        out = global_avg_pool(Tensor(x))
        assert out.shape == (2, 3, 1, 1)
        assert_allclose(out.data[..., 0, 0], x.mean(axis=(2, 3)), rtol=1e-6)
