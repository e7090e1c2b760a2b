import numpy as np
import pytest

from dfssm.tensor import Tensor, gradcheck, relative_error, make_result, silu, gelu, softplus, sigmoid, exp, sqrt, log


def _wrong_square(x: Tensor) -> Tensor:
    # reports 3x instead of 2x
    return make_result(x.data ** 2, (x,), lambda g: (g * 3 * x.data,), 'wrong_square')


@pytest.mark.unittest
class TestGradcheck:
    def test_relative_error(self):
        assert relative_error(np.array([1.0, 0.0]), np.array([1.0, 0.0])) == 0.0
        assert relative_error(np.zeros(3), np.zeros(3)) == 0.0
        assert relative_error(np.array([3.0, 4.0]), np.zeros(2)) == pytest.approx(1.0)

    def test_floor_bounds_denominator(self):
        a, n = np.array([1e-9]), np.array([2e-9])
        assert relative_error(a, n) == pytest.approx(0.5)
        assert relative_error(a, n, floor=1e-7) == pytest.approx(1e-2)

    @pytest.mark.parametrize('fn', [silu, gelu, softplus, sigmoid, exp])
    def test_activations_pass(self, fn, rng, f64):
        x = Tensor(rng.standard_normal((3, 4)), requires_grad=True)
        assert gradcheck(fn, [x], rng=rng).passed(1e-6)

    def test_positive_domain_ops(self, rng, f64):
        x = Tensor(rng.uniform(0.5, 2.0, (2, 3)), requires_grad=True)
        assert gradcheck(sqrt, [x], rng=rng).passed(1e-6)
        assert gradcheck(log, [x], rng=rng).passed(1e-6)

    def test_detects_wrong_gradient(self, rng, f64):
        x = Tensor(rng.uniform(1.0, 2.0, 5), requires_grad=True)
        result = gradcheck(_wrong_square, [x], names=['x'], rng=rng)
        assert not result.passed(1e-4)
        assert result.worst_input == 'x'
        assert result.worst == pytest.approx(1 / 3, rel=1e-3)

    def test_skips_constants(self, rng, f64):
        a = Tensor(rng.standard_normal(3), requires_grad=True)
        b = Tensor(rng.standard_normal(3))
        result = gradcheck(lambda x, y: x * y, [a, b], names=['a', 'b'], rng=rng)
        assert list(result.errors) == ['a']

    def test_max_elements(self, rng, f64):
        x = Tensor(rng.standard_normal(100), requires_grad=True)
        calls = []

        def _fn(t):
            calls.append(1)
            return t * t

        gradcheck(_fn, [x], max_elements=5, rng=rng)
        assert len(calls) == 1 + 2 * 5

    def test_restores_inputs(self, rng, f64):
        data = rng.standard_normal(4)
        x = Tensor(data.copy(), requires_grad=True)
        gradcheck(exp, [x], rng=rng)
        np.testing.assert_array_equal(x.data, data)
        assert x.grad is None
