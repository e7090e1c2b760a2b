import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from dfssm.blocks import ChannelAttention, bottleneck_width, FFTM, SSB, FSSB, MGCB, ConvLayer, StateSpaceGroup, \
    expanded_width
from dfssm.errors import ConfigError
from dfssm.tensor import Tensor, gradcheck, zero_


def _silu(x):
    return x / (1 + np.exp(-x))


def _pointwise(conv, x):
    out = np.einsum('nchw,oc->nohw', x, conv.weight.data[:, :, 0, 0])
    if conv.bias is not None:
        out = out + conv.bias.data[None, :, None, None]
    return out


def _mgcb_params(c: int, gamma: float) -> int:
    hidden = int(gamma * c)
    half = hidden // 2
    squeeze = max(c // min(16, c), 1)
    attention = c * squeeze + squeeze + squeeze * c + c
    return (2 * c + c * hidden + 9 * hidden + 2 * c * half + 9 * half + 25 * half + hidden * c
            + attention + c)


@pytest.mark.unittest
class TestChannelAttention:
    @pytest.mark.parametrize('channels, expected', [(4, 1), (8, 1), (16, 1), (48, 3), (64, 4)])
    def test_bottleneck_width(self, channels, expected):
        assert bottleneck_width(channels) == expected

    def test_explicit_reduction(self):
        assert bottleneck_width(16, 4) == 4
        assert bottleneck_width(3, 8) == 1
        with pytest.raises(ValueError):
            bottleneck_width(16, 0)

    def test_rescales_channels(self, rng, f64):
        module = ChannelAttention(8, rng)
        x = rng.uniform(0.5, 1.5, (2, 8, 3, 4))
        out = module(Tensor(x)).data
        ratio = out / x
        assert_allclose(ratio, ratio[..., :1, :1] * np.ones_like(ratio), rtol=1e-12)
        assert ((ratio > 0) & (ratio < 1)).all()

    def test_weights(self, rng, f64):
        module = ChannelAttention(4, rng)
        x = rng.standard_normal((1, 4, 2, 2))
        hidden = np.maximum(_pointwise(module.squeeze, x.mean(axis=(2, 3), keepdims=True)), 0)
        expected = 1 / (1 + np.exp(-_pointwise(module.excite, hidden)))
        assert_allclose(module.weights(Tensor(x)).data, expected, rtol=1e-12)


@pytest.mark.unittest
class TestFFTM:
    def test_matches_numpy_reference(self, rng, f64):
        module = FFTM(4, rng)
        x = rng.standard_normal((2, 4, 5, 6))
        z = _silu(_pointwise(module.reduce, x))
        spec = np.fft.rfft2(z)
        packed = _silu(_pointwise(module.freq_conv, np.concatenate([spec.real, spec.imag], axis=1)))
        z = np.fft.irfft2(packed[:, :2] + 1j * packed[:, 2:], s=(5, 6))
        expected = _pointwise(module.expand, z)
        assert_allclose(module(Tensor(x)).data, expected, atol=1e-10)

    def test_odd_width(self, rng, f64):
        module = FFTM(2, rng)
        assert module(Tensor(rng.standard_normal((1, 2, 3, 5)))).shape == (1, 2, 3, 5)

    def test_parameter_shapes(self, rng):
        module = FFTM(8, rng).assign_names()
        assert {p.name: p.shape for p in module.parameters()} == {
            'reduce.weight': (4, 8, 1, 1), 'reduce.bias': (4,),
            'freq_conv.weight': (8, 8, 1, 1), 'freq_conv.bias': (8,),
            'expand.weight': (8, 4, 1, 1), 'expand.bias': (8,),
        }

    def test_odd_channels_rejected(self, rng):
        with pytest.raises(ConfigError):
            FFTM(3, rng)
        assert FFTM(3, rng, spatial_convs=False).hidden == 3

    def test_spatial_variant(self, rng, f64):
        module = FFTM(4, rng, use_fft=False)
        x = rng.standard_normal((1, 4, 3, 3))
        z = _silu(_pointwise(module.freq_conv, _silu(_pointwise(module.reduce, x))))
        assert_allclose(module(Tensor(x)).data, _pointwise(module.expand, z), atol=1e-12)

    def test_without_spatial_convs(self, rng, f64):
        module = FFTM(2, rng, spatial_convs=False).assign_names()
        assert [p.name for p in module.parameters()] == ['freq_conv.weight', 'freq_conv.bias']
        assert module(Tensor(rng.standard_normal((1, 2, 4, 4)))).shape == (1, 2, 4, 4)

    def test_gradients(self, rng, f64):
        module = FFTM(2, rng)
        x = Tensor(rng.standard_normal((1, 2, 4, 5)), requires_grad=True)
        result = gradcheck(module, [x], rng=rng, eps=1e-5, floor=1e-7)
        assert result.passed(1e-4), result.errors


@pytest.mark.unittest
class TestStateSpaceBlocks:
    def test_ssb_silent_scan_is_scaled_identity(self, rng, f64):
        module = SSB(4, 2, rng)
        zero_(module.vssm.out_proj.weight)
        module.scale.scale.data[...] = [1.0, 2.0, 0.5, -1.0]
        x = rng.standard_normal((1, 4, 3, 3))
        assert_array_equal(module(Tensor(x)).data, x * module.scale.scale.data[None, :, None, None])

    def test_fssb_without_frequency_branch_matches_ssb(self, f64):
        ssb = SSB(4, 2, np.random.default_rng(7))
        fssb = FSSB(4, 2, np.random.default_rng(7))
        zero_(fssb.fftm.expand.weight)
        zero_(fssb.fftm.expand.bias)
        x = Tensor(np.random.default_rng(8).standard_normal((2, 4, 4, 5)))
        assert_array_equal(fssb(x).data, ssb(x).data)

    def test_fssb_state_extends_ssb(self, rng):
        ssb = SSB(4, 2, rng).assign_names()
        fssb = FSSB(4, 2, rng).assign_names()
        ssb_names = {name for name, _ in ssb.named_parameters()}
        fssb_names = {name for name, _ in fssb.named_parameters()}
        assert ssb_names < fssb_names
        assert all(name.startswith('fftm.') for name in fssb_names - ssb_names)

    def test_fssb_gradients(self, rng, f64):
        module = FSSB(2, 2, rng, expand=1)
        x = Tensor(rng.standard_normal((1, 2, 3, 4)), requires_grad=True)
        result = gradcheck(module, [x], rng=rng, eps=1e-5, floor=1e-7)
        assert result.passed(1e-4), result.errors


@pytest.mark.unittest
class TestConvBlocks:
    def test_expanded_width(self):
        assert expanded_width(4, 2.0) == 8
        assert expanded_width(4, 1.5) == 6
        for gamma in (1.25, 0.3, -2.0):
            with pytest.raises(ConfigError):
                expanded_width(4, gamma)

    @pytest.mark.parametrize('channels, gamma', [(4, 2.0), (8, 1.5), (48, 2.0)])
    def test_mgcb_parameter_count(self, rng, channels, gamma):
        assert MGCB(channels, rng, gamma=gamma).num_params() == _mgcb_params(channels, gamma)

    def test_mgcb_zero_gate(self, rng, f64):
        module = MGCB(4, rng)
        zero_(module.gate_proj.weight)
        module.scale.scale.data[...] = 0.25
        x = rng.standard_normal((2, 4, 5, 5))
        assert_array_equal(module(Tensor(x)).data, x * 0.25)

    def test_mgcb_output_grows_with_gate(self, rng, f64):
        module = MGCB(4, rng)
        # constant positive normed input, non-negative weights, fixed attention weights
        module.norm.gamma.data[...] = 0
        module.norm.beta.data[...] = 1
        for conv in (module.gate_proj, module.gate_dw, module.proj3, module.dw3, module.proj5, module.dw5,
                     module.out_proj):
            conv.weight.data[...] = np.abs(conv.weight.data) + 0.01
        zero_(module.attention.excite.weight)
        module.scale.scale.data[...] = 0
        base = module.gate_proj.weight.data.copy()
        x = Tensor(rng.standard_normal((1, 4, 6, 6)))

        outputs = []
        for alpha in (0.0, 0.5, 1.0, 2.0):
            module.gate_proj.weight.data[...] = alpha * base
            outputs.append(module(x).data)
        assert_array_equal(outputs[0], 0)
        for lower, higher in zip(outputs, outputs[1:]):
            assert (higher > lower).all()

    def test_mgcb_branches(self, rng, f64):
        module = MGCB(4, rng, gamma=2.0)
        gate, mixed = module.branches(Tensor(rng.standard_normal((1, 4, 6, 6))))
        assert gate.shape == mixed.shape == (1, 8, 6, 6)

    def test_mgcb_gradients(self, rng, f64):
        module = MGCB(4, rng)
        x = Tensor(rng.standard_normal((1, 4, 4, 4)), requires_grad=True)
        result = gradcheck(module, [x], rng=rng, eps=1e-5, floor=1e-7)
        assert result.passed(1e-4), result.errors

    def test_conv_layer(self, rng, f64):
        module = ConvLayer(4, rng)
        x = rng.standard_normal((1, 4, 5, 5))
        assert module(Tensor(x)).shape == (1, 4, 5, 5)
        zero_(module.conv2.weight)
        zero_(module.conv2.bias)
        assert_array_equal(module(Tensor(x)).data, x)


@pytest.mark.unittest
class TestStateSpaceGroup:
    @pytest.mark.parametrize('frequency, conv_block, prefixes', [
        (False, 'mgcb', ('ssb.', 'mgcb.')),
        (True, 'mgcb', ('fssb.', 'mgcb.')),
        (True, 'conv_layer', ('fssb.', 'conv_layer.')),
    ])
    def test_parameter_paths(self, rng, frequency, conv_block, prefixes):
        group = StateSpaceGroup(4, 2, rng, frequency=frequency, conv_block=conv_block).assign_names()
        names = [p.name for p in group.parameters()]
        assert all(name.startswith(prefixes) for name in names)
        assert group.kind == ('fssg' if frequency else 'ssg')

    def test_unknown_conv_block(self, rng):
        with pytest.raises(AssertionError):
            StateSpaceGroup(4, 2, rng, conv_block='resnet')

    def test_forward_order(self, rng, f64):
        group = StateSpaceGroup(4, 2, rng, frequency=True)
        x = Tensor(rng.standard_normal((1, 4, 3, 3)))
        assert_array_equal(group(x).data, group.mgcb(group.fssb(x)).data)
