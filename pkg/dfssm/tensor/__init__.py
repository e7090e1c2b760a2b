from .gradcheck import gradcheck, GradcheckResult, relative_error, DEFAULT_EPS, DEFAULT_TOLERANCE
from .layers import Conv2d, DWConv2d, LayerNorm, Scale, uniform_init, zero_
from .module import Module, ModuleList
from .nn import conv2d, dwconv2d, layer_norm, pixel_shuffle, pixel_unshuffle, global_avg_pool
from .ops import add, sub, mul, div, neg, exp, log, sqrt, abs_, complex_abs, relu, sigmoid, silu, gelu, \
    softplus, activation, ACTIVATIONS, sum_, mean, reshape, transpose, swapaxes, flip, getitem, concat, stack, \
    PaddingSpec, reflect_indices, pad2d, crop2d, matmul, unbroadcast
from .tensor import Tensor, Parameter, Tape, as_tensor, make_result, backward, precision, no_grad, checked, \
    get_default_dtype, is_grad_enabled, is_checked
