from .attention import ChannelAttention, bottleneck_width, DEFAULT_REDUCTION
from .conv_layer import ConvLayer
from .fftm import FFTM
from .group import StateSpaceGroup, CONV_BLOCKS
from .mgcb import MGCB, expanded_width, DEFAULT_GAMMA
from .ssb import SSB, FSSB
