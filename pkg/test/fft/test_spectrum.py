import numpy as np
import pytest
from numpy.testing import assert_allclose

from dfssm.errors import DimensionError
from dfssm.fft import spectrum_image, amplitude_spectrum, angular_energy_histogram, dominant_orientation, \
    angular_distance, center_shift, frequency_grid, GRAY_WEIGHTS
from dfssm.tensor import Tensor


def _stripes(h: int, w: int, axis: int, cycles: int = 4) -> np.ndarray:
    coord = np.arange(w if axis == 1 else h)
    wave = np.cos(2 * np.pi * cycles * coord / len(coord))
    return np.tile(wave, (h, 1)) if axis == 1 else np.tile(wave[:, None], (1, w))


@pytest.mark.unittest
class TestSpectrum:
    def test_gray_weights(self):
        assert GRAY_WEIGHTS.sum() == pytest.approx(1.0)

    def test_constant_plane(self):
        amp = amplitude_spectrum(np.full((4, 6), 0.5))
        assert amp[0, 0] == pytest.approx(12.0)
        assert_allclose(amp.reshape(-1)[1:], 0, atol=1e-9)

    def test_rgb_uses_luma(self, rng):
        plane = rng.uniform(size=(5, 5))
        rgb = np.stack([plane] * 3)
        assert_allclose(amplitude_spectrum(rgb), amplitude_spectrum(plane), atol=1e-10)
        assert_allclose(amplitude_spectrum(Tensor(rgb[None])), amplitude_spectrum(plane), atol=1e-5)

    def test_bad_shapes(self):
        with pytest.raises(DimensionError):
            amplitude_spectrum(np.zeros((2, 3, 4, 4)))
        with pytest.raises(DimensionError):
            amplitude_spectrum(np.zeros((2, 4, 4)))
        with pytest.raises(DimensionError):
            amplitude_spectrum(np.zeros(8))

    def test_spectrum_image(self, rng):
        out = spectrum_image(rng.uniform(size=(3, 8, 10)))
        assert out.shape == (1, 1, 8, 10)
        assert out.dtype == np.float32
        assert out.data.min() == pytest.approx(0.0)
        assert out.data.max() == pytest.approx(1.0)

    def test_spectrum_image_centers_dc(self):
        out = spectrum_image(np.full((6, 8), 0.3)).data[0, 0]
        assert out[3, 4] == pytest.approx(1.0)
        assert out.sum() == pytest.approx(1.0)
        raw = spectrum_image(np.full((6, 8), 0.3), shift=False).data[0, 0]
        assert raw[0, 0] == pytest.approx(1.0)

    def test_spectrum_image_of_zeros(self):
        assert not spectrum_image(np.zeros((4, 4))).data.any()

    def test_center_shift(self):
        plane = np.zeros((5, 4))
        plane[0, 0] = 1
        assert center_shift(plane)[2, 2] == 1

    def test_frequency_grid(self):
        ky, kx = frequency_grid(4, 5)
        assert ky[:, 0].tolist() == [0, 1, -2, -1]
        assert kx[0].tolist() == [0, 1, 2, -2, -1]


@pytest.mark.unittest
class TestOrientation:
    def test_vertical_stripes(self):
        # columns alternate, so the energy sits on the horizontal frequency axis
        assert angular_distance(dominant_orientation(_stripes(32, 32, axis=1)), 90.0) <= 5.0

    def test_horizontal_stripes(self):
        assert angular_distance(dominant_orientation(_stripes(32, 32, axis=0)), 0.0) <= 5.0

    def test_histogram_shape(self, rng):
        hist, centers = angular_energy_histogram(rng.uniform(size=(16, 16)), bins=12)
        assert hist.shape == centers.shape == (12,)
        assert centers[0] == pytest.approx(7.5)
        assert (hist >= 0).all()

    def test_dc_excluded(self):
        hist, _ = angular_energy_histogram(np.full((16, 16), 0.7))
        assert_allclose(hist, 0, atol=1e-9)

    def test_angular_distance(self):
        assert angular_distance(170.0, 10.0) == pytest.approx(20.0)
        assert angular_distance(0.0, 179.0) == pytest.approx(1.0)
        assert angular_distance(45.0, 45.0 + 180.0) == pytest.approx(0.0)
