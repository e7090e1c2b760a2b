from .dataset import PairDataset, make_dataset, read_manifest, write_manifest, format_manifest_line, \
    parse_manifest_line, MANIFEST_NAME, RAINY_DIR, CLEAN_DIR
from .image import load_png, save_png, to_float, to_uint8, png_bit_depth
from .metrics import rgb_to_y, psnr_y, ssim_y, gaussian_window
from .rain import RainParams, ImagePair, line_kernel, rain_layer, synth_rain
from .scene import render_scene
