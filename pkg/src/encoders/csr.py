"""CSR with 16-bit column indices and row pointers (comparison baseline)."""
import logging
import struct
from dataclasses import dataclass

import numpy as np

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config import CONTAINER_VERSION, CSR_MAGIC, U16_MAX
from encoders.container import SectionReader, SectionWriter
from encoders.footprint import FootprintBreakdown
from errors import FormatError, FormatLimitError
from matrix.dense import DenseMatrixI8

logger = logging.getLogger(__name__)

_HEADER = struct.Struct("<4sBBHIII")


@dataclass(frozen=True, eq=False)
class CsrMatrix16:
    rows: int
    cols: int
    values: np.ndarray
    col_idx: np.ndarray
    row_ptr: np.ndarray

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CsrMatrix16):
            return NotImplemented
        return (
            (self.rows, self.cols) == (other.rows, other.cols)
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.col_idx, other.col_idx)
            and np.array_equal(self.row_ptr, other.row_ptr)
        )


def encode_csr(m: DenseMatrixI8) -> CsrMatrix16:
    """
    Convert a dense matrix to CSR-16.

    Raises:
        FormatLimitError: nnz or a column index does not fit 16 bits
    """
    nnz = m.nnz
    if nnz > U16_MAX:
        raise FormatLimitError(f"CSR-16 holds at most {U16_MAX} non-zeros, matrix has {nnz}")
    if m.cols - 1 > U16_MAX:
        raise FormatLimitError(f"CSR-16 column indices cannot address {m.cols} columns")

    rows, cols = np.nonzero(m.data)
    counts = np.bincount(rows, minlength=m.rows)
    row_ptr = np.concatenate(([0], np.cumsum(counts))).astype(np.uint16)
    return CsrMatrix16(
        rows=m.rows,
        cols=m.cols,
        values=m.data[rows, cols].astype(np.int8),
        col_idx=cols.astype(np.uint16),
        row_ptr=row_ptr,
    )


def decode_csr(c: CsrMatrix16) -> DenseMatrixI8:
    data = np.zeros((c.rows, c.cols), dtype=np.int8)
    ptr = c.row_ptr.astype(np.int64)
    if ptr.size != c.rows + 1 or ptr[0] != 0 or np.any(np.diff(ptr) < 0) or ptr[-1] != c.nnz:
        raise FormatError("CSR row_ptr is inconsistent with the values array")
    if c.nnz and int(c.col_idx.max()) >= c.cols:
        raise FormatError("CSR column index outside the matrix")
    row_of = np.repeat(np.arange(c.rows), np.diff(ptr))
    data[row_of, c.col_idx.astype(np.int64)] = c.values
    return DenseMatrixI8(c.rows, c.cols, data)


def footprint_csr(c: CsrMatrix16) -> FootprintBreakdown:
    return FootprintBreakdown(
        format="csr",
        rows=c.rows,
        cols=c.cols,
        values_bytes=c.nnz,
        padding_bytes=0,
        metadata_bytes=c.nnz * 2 + (c.rows + 1) * 2,
        components={"col_idx": c.nnz * 2, "row_ptr": (c.rows + 1) * 2},
    )


def serialize_csr(c: CsrMatrix16) -> bytes:
    writer = SectionWriter(_HEADER.pack(CSR_MAGIC, CONTAINER_VERSION, 0, 0, c.rows, c.cols, c.nnz))
    writer.add(c.row_ptr, "u2")
    writer.add(c.col_idx, "u2")
    writer.add(c.values, "i1")
    return writer.finish()


def deserialize_csr(blob: bytes) -> CsrMatrix16:
    reader = SectionReader(blob, _HEADER, CSR_MAGIC)
    _, version, _, _, rows, cols, nnz = reader.header
    if version != CONTAINER_VERSION:
        raise FormatError(f"Unsupported CSR container version {version}")
    row_ptr = reader.read(rows + 1, "u2", "row_ptr")
    col_idx = reader.read(nnz, "u2", "col_idx")
    values = reader.read(nnz, "i1", "values")
    reader.finish()
    return CsrMatrix16(rows, cols, values, col_idx, row_ptr)
