from .scan import selective_scan, scan_with_params, SelectiveScan, SelectiveScanParams, default_chunk, \
    scan_flops, inverse_softplus, SCAN_FLOPS_PER_STATE
from .ss2d import ScanDirection, DIRECTIONS, flatten_direction, unflatten_direction, ss2d, SS2D
from .vssm import VSSM, DEFAULT_EXPAND
