"""Binary checkpoints.

Layout (little-endian): `<4sH64sI` header = (b"HGCK", version, config hash as 64 hex chars, tensor count), then per
tensor `<H` name length, utf-8 name, `<Bqq` (ndim, rows, cols) and rows * cols f8 values. One-dimensional tensors
are stored with rows = 1.
"""
import hashlib
import json
import logging
import os
import struct
import typing

import numpy as np

from halognn import errors
from halognn.nn.params import ModelParams

log = logging.getLogger(__name__)

_MAGIC = b"HGCK"
_VERSION = 1
_HEADER = struct.Struct("<4sH64sI")
_NAME = struct.Struct("<H")
_SHAPE = struct.Struct("<Bqq")


def config_hash(config: typing.Mapping[str, typing.Any]) -> str:
    """SHA-256 of the canonical JSON form of a configuration mapping."""
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()


def save_checkpoint(path: str | os.PathLike, params: ModelParams, digest: str) -> None:
    if len(digest) != 64:
        raise errors.CheckpointError(f"Invalid config hash {digest!r}: expected 64 hex characters")
    chunks = [_HEADER.pack(_MAGIC, _VERSION, digest.encode(), len(params))]
    for name, tensor in params.items():
        if tensor.ndim not in (1, 2):
            raise errors.CheckpointError(f"Cannot store {name} with {tensor.ndim} dimensions")
        rows, cols = (1, tensor.shape[0]) if tensor.ndim == 1 else tensor.shape
        encoded = name.encode()
        chunks += [_NAME.pack(len(encoded)), encoded, _SHAPE.pack(tensor.ndim, rows, cols)]
        chunks.append(tensor.astype("<f8").tobytes())
    with open(path, "wb") as f:
        f.write(b"".join(chunks))
    log.info(f"Wrote checkpoint with {params.count()} parameters to {path}")


def load_checkpoint(path: str | os.PathLike, expected_hash: str | None = None) -> tuple[ModelParams, str]:
    """Read a checkpoint; a differing config hash raises when `expected_hash` is given."""
    try:
        with open(path, "rb") as f:
            data = f.read()
        magic, version, digest_bytes, count = _HEADER.unpack_from(data, 0)
    except (OSError, struct.error) as e:
        raise errors.CheckpointError(f"Cannot read checkpoint {path}: {e}") from e
    if magic != _MAGIC or version != _VERSION:
        raise errors.CheckpointError(f"Not a checkpoint: {path} (magic {magic!r}, version {version})")
    digest = digest_bytes.decode()
    if expected_hash is not None and digest != expected_hash:
        raise errors.CheckpointError(f"Checkpoint {path} was written for a different configuration")

    offset, tensors = _HEADER.size, {}
    try:
        for _ in range(count):
            (length,) = _NAME.unpack_from(data, offset)
            offset += _NAME.size
            name = data[offset : offset + length].decode()
            offset += length
            ndim, rows, cols = _SHAPE.unpack_from(data, offset)
            offset += _SHAPE.size
            values = np.frombuffer(data, dtype="<f8", count=rows * cols, offset=offset).astype(np.float64)
            offset += 8 * rows * cols
            tensors[name] = values.reshape(cols) if ndim == 1 else values.reshape(rows, cols)
    except (struct.error, ValueError, UnicodeDecodeError) as e:
        raise errors.CheckpointError(f"Truncated or corrupt checkpoint {path}: {e}") from e
    return ModelParams(tensors), digest
