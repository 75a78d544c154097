"""
Checkpoint container

    8 bytes   magic b'HIGRUCKP'
    4 bytes   format version, little-endian uint32
    8 bytes   header length, little-endian uint64
    header    UTF-8 JSON: config, metadata, arrays [{name, shape, offset}]
    blocks    raw little-endian float64 arrays; offsets count from the first block
"""
import json
import struct

import numpy as np

from higru.errors import CheckpointError, DimensionError, HiGRUError
from higru.models.network import ModelConfig, ModelParams
from higru.utils.files import atomic_write

MAGIC = b'HIGRUCKP'
VERSION = 1
_PREFIX = struct.Struct('<8sIQ')


def save_checkpoint(params, path, metadata=None):
    """Write every parameter array bit-exactly plus the config and metadata"""
    manifest = []
    blocks = []
    offset = 0
    for name, tensor in params.named_parameters():
        block = np.ascontiguousarray(tensor.data, dtype='<f8').tobytes()
        manifest.append({'name': name, 'shape': list(tensor.shape), 'offset': offset})
        blocks.append(block)
        offset += len(block)

    header = json.dumps({
        'config': params.config.to_dict(),
        'metadata': metadata or {},
        'arrays': manifest,
    }, sort_keys=True).encode('utf-8')

    with atomic_write(path, 'wb') as handle:
        handle.write(_PREFIX.pack(MAGIC, VERSION, len(header)))
        handle.write(header)
        for block in blocks:
            handle.write(block)


def load_checkpoint(path, expected_config=None):
    """
    Read a checkpoint

    Args:
        path: checkpoint file
        expected_config: when given, the stored arrays must fit this config

    Returns:
        (ModelParams, ModelConfig, metadata dict)

    Raises:
        CheckpointError: on a bad magic, unsupported version, truncated
            data, or arrays that do not fit the config
    """
    with open(path, 'rb') as handle:
        raw = handle.read()
    if len(raw) < _PREFIX.size:
        raise CheckpointError(f'{path}: file too short to be a checkpoint')
    magic, version, header_len = _PREFIX.unpack_from(raw)
    if magic != MAGIC:
        raise CheckpointError(f'{path}: not a checkpoint file')
    if version != VERSION:
        raise CheckpointError(f'{path}: checkpoint version {version}, this build reads {VERSION}')
    try:
        header = json.loads(raw[_PREFIX.size:_PREFIX.size + header_len].decode('utf-8'))
        stored_config = ModelConfig.from_dict(header['config'])
    except (ValueError, KeyError, TypeError) as e:
        raise CheckpointError(f'{path}: unreadable header ({e})') from None

    config = expected_config or stored_config
    data_start = _PREFIX.size + header_len
    arrays = {}
    for entry in header['arrays']:
        count = int(np.prod(entry['shape'], dtype=np.int64))
        start = data_start + entry['offset']
        if start + 8 * count > len(raw):
            raise CheckpointError(f"{path}: array '{entry['name']}' is truncated")
        arrays[entry['name']] = np.frombuffer(raw, dtype='<f8', count=count, offset=start) \
            .reshape(entry['shape']).astype(np.float64)

    try:
        params = ModelParams.initialize(config, np.random.default_rng(0),
                                        embeddings=arrays.get('embedding'))
        params.load_arrays(arrays)
    except (DimensionError, HiGRUError) as e:
        raise CheckpointError(f'{path}: checkpoint does not fit the model config: {e}') from None
    return params, config, header.get('metadata', {})
