"""Minimal little-endian binary format for dense int8 matrices (activations)."""
import logging
import struct
from pathlib import Path
from typing import Union

import numpy as np

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from config import DENSE_MAGIC
from errors import FormatError
from matrix.dense import DenseMatrixI8
from matrix.market import load_matrix_market

logger = logging.getLogger(__name__)

_HEADER = struct.Struct("<4sII")


def dense_to_bytes(m: DenseMatrixI8) -> bytes:
    return _HEADER.pack(DENSE_MAGIC, m.rows, m.cols) + m.data.tobytes()


def dense_from_bytes(blob: bytes) -> DenseMatrixI8:
    """
    Parse a dense binary blob.

    Raises:
        FormatError: Bad magic, zero dimension, truncated or oversized payload
    """
    if len(blob) < _HEADER.size:
        raise FormatError(f"Dense binary truncated: {len(blob)} bytes, header needs {_HEADER.size}")

    magic, rows, cols = _HEADER.unpack_from(blob)
    if magic != DENSE_MAGIC:
        raise FormatError(f"Bad dense binary magic {magic!r}")
    if rows == 0 or cols == 0:
        raise FormatError(f"Dense binary has empty shape {rows}x{cols}")

    expected = rows * cols
    payload = len(blob) - _HEADER.size
    if payload < expected:
        raise FormatError(f"Dense binary truncated: payload {payload} bytes, expected {expected}")
    if payload > expected:
        raise FormatError(f"Dense binary has {payload - expected} trailing bytes")

    data = np.frombuffer(blob, dtype=np.int8, count=expected, offset=_HEADER.size)
    return DenseMatrixI8(rows, cols, data.copy())


def store_dense_binary(m: DenseMatrixI8, path: Union[str, Path]) -> None:
    Path(path).write_bytes(dense_to_bytes(m))
    logger.info(f"Wrote {m.rows}x{m.cols} dense matrix to {path}")


def load_dense_binary(path: Union[str, Path]) -> DenseMatrixI8:
    m = dense_from_bytes(Path(path).read_bytes())
    logger.info(f"Loaded {m.rows}x{m.cols} dense matrix from {path}")
    return m


def load_matrix(path: Union[str, Path]) -> DenseMatrixI8:
    """Load a matrix from either supported file format, chosen by content."""
    with open(path, "rb") as handle:
        magic = handle.read(len(DENSE_MAGIC))
    if magic == DENSE_MAGIC:
        return load_dense_binary(path)
    return load_matrix_market(path)
