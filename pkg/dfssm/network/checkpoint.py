"""
Binary checkpoint format.

Layout, all integers unsigned 32-bit little-endian::

    b'DFSM' | version | entry count
    per entry: name length | UTF-8 name | rank | dims... | float32 LE payload
"""
import os
import struct
from collections import OrderedDict
from typing import Dict, Mapping, Union

import numpy as np
from ditk import logging
from hbutils.string import plural_word

from ..errors import CheckpointFormatError, UsageError
from ..tensor import Module

MAGIC = b'DFSM'
FORMAT_VERSION = 1
CONFIG_NAME = 'config.cfg'

_U32 = struct.Struct('<I')
_PAYLOAD = np.dtype('<f4')


def encode_checkpoint(state: Mapping[str, np.ndarray]) -> bytes:
    chunks = [MAGIC, _U32.pack(FORMAT_VERSION), _U32.pack(len(state))]
    for name, array in state.items():
        raw_name = name.encode('utf-8')
        array = np.asarray(array)
        chunks.append(_U32.pack(len(raw_name)))
        chunks.append(raw_name)
        chunks.append(_U32.pack(array.ndim))
        chunks.extend(_U32.pack(dim) for dim in array.shape)
        chunks.append(np.ascontiguousarray(array, dtype=_PAYLOAD).tobytes())
    return b''.join(chunks)


class _Reader:
    def __init__(self, data: bytes, source: str):
        self.data = data
        self.offset = 0
        self.source = source

    def take(self, size: int, what: str) -> bytes:
        if self.offset + size > len(self.data):
            raise CheckpointFormatError(f'Checkpoint {self.source!r} truncated while reading {what} '
                                        f'at byte {self.offset!r}.')
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def u32(self, what: str) -> int:
        return _U32.unpack(self.take(_U32.size, what))[0]


def decode_checkpoint(data: bytes, source: str = '<bytes>') -> Dict[str, np.ndarray]:
    """
    :raises CheckpointFormatError: On a bad magic, unknown version, truncation,
        duplicate names or trailing bytes.
    """
    reader = _Reader(data, source)
    magic = reader.take(len(MAGIC), 'magic')
    if magic != MAGIC:
        raise CheckpointFormatError(f'{source!r} is not a checkpoint, magic {magic!r} found.')
    version = reader.u32('version')
    if version != FORMAT_VERSION:
        raise CheckpointFormatError(f'Unsupported checkpoint version {version!r} in {source!r}.')

    state = OrderedDict()
    for _ in range(reader.u32('entry count')):
        raw_name = reader.take(reader.u32('name length'), 'name')
        try:
            name = raw_name.decode('utf-8')
        except UnicodeDecodeError as err:
            raise CheckpointFormatError(f'Invalid entry name {raw_name!r} in {source!r}.') from err
        if name in state:
            raise CheckpointFormatError(f'Duplicate entry {name!r} in {source!r}.')
        shape = tuple(reader.u32(f'dims of {name!r}') for _ in range(reader.u32(f'rank of {name!r}')))
        count = int(np.prod(shape, dtype=np.int64))
        payload = reader.take(count * _PAYLOAD.itemsize, f'payload of {name!r}')
        state[name] = np.frombuffer(payload, dtype=_PAYLOAD).astype(np.float32).reshape(shape)

    if reader.offset != len(data):
        raise CheckpointFormatError(f'{len(data) - reader.offset!r} trailing bytes in {source!r}.')
    return state


def save_checkpoint(source: Union[Module, Mapping[str, np.ndarray]], path: str):
    state = source.state_dict() if isinstance(source, Module) else source
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    tmp_path = f'{path}.tmp'
    with open(tmp_path, 'wb') as f:
        f.write(encode_checkpoint(state))
    os.replace(tmp_path, path)
    logging.info(f'{plural_word(len(state), "tensor")} saved to {path!r}.')


def load_checkpoint(path: str) -> Dict[str, np.ndarray]:
    try:
        with open(path, 'rb') as f:
            data = f.read()
    except OSError as err:
        raise UsageError(f'Cannot read checkpoint {path!r}: {err}') from err
    return decode_checkpoint(data, source=path)


def restore_model(model: Module, path: str) -> Module:
    model.load_state_dict(load_checkpoint(path))
    logging.info(f'Model restored from {path!r}.')
    return model


def config_path_for(checkpoint_path: str) -> str:
    return os.path.join(os.path.dirname(os.path.abspath(checkpoint_path)), CONFIG_NAME)
