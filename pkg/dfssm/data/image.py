"""
8-bit RGB PNG input and output.

Images are ``uint8`` arrays of shape ``(h, w, 3)``; the network side works on
``float32`` ``(3, h, w)`` arrays in ``[0, 1]``.
"""
import os

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..errors import ImageIOError, ImageFormatError

PNG_SIGNATURE = b'\x89PNG\r\n\x1a\n'
# signature, chunk length, chunk type, width and height precede the bit depth byte
_IHDR_BIT_DEPTH_OFFSET = 24


def png_bit_depth(path: str) -> int:
    with open(path, 'rb') as f:
        header = f.read(_IHDR_BIT_DEPTH_OFFSET + 1)
    if len(header) <= _IHDR_BIT_DEPTH_OFFSET or not header.startswith(PNG_SIGNATURE) \
            or header[12:16] != b'IHDR':
        raise ImageFormatError(f'{path!r} is not a PNG file.')
    return header[_IHDR_BIT_DEPTH_OFFSET]


def load_png(path: str) -> np.ndarray:
    """
    Load a PNG as ``(h, w, 3)`` ``uint8``. Alpha is dropped, gray and palette images
    are expanded to RGB.

    :raises ImageIOError: When the file is missing or cannot be decoded.
    :raises ImageFormatError: When it is not a PNG or uses 16-bit samples.
    """
    try:
        depth = png_bit_depth(path)
    except OSError as err:
        raise ImageIOError(path, str(err)) from err
    if depth > 8:
        raise ImageFormatError(f'Unsupported PNG bit depth {depth!r} in {path!r}, 8-bit expected.')

    try:
        with Image.open(path) as image:
            image.load()
            rgb = image.convert('RGB')
    except (UnidentifiedImageError, OSError, SyntaxError) as err:
        raise ImageIOError(path, str(err)) from err
    return np.asarray(rgb, dtype=np.uint8).copy()


def save_png(image: np.ndarray, path: str):
    image = np.asarray(image)
    if image.dtype != np.uint8 or image.ndim != 3 or image.shape[2] != 3:
        raise ImageFormatError(f'Expected a (h, w, 3) uint8 image, but {image.dtype} {image.shape!r} found.')
    directory = os.path.dirname(path)
    try:
        if directory:
            os.makedirs(directory, exist_ok=True)
        Image.fromarray(image).save(path, format='PNG')
    except OSError as err:
        raise ImageIOError(path, str(err)) from err


def to_float(image: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(np.transpose(image, (2, 0, 1)), dtype=np.float32) / np.float32(255)


def to_uint8(array: np.ndarray) -> np.ndarray:
    scaled = np.rint(np.clip(np.asarray(array, dtype=np.float64), 0.0, 1.0) * 255.0)
    return np.ascontiguousarray(np.transpose(scaled, (1, 2, 0))).astype(np.uint8)
