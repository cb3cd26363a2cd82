"""Block CSR with fixed 2x2 blocks and 16-bit block indices (comparison baseline)."""
import logging
import struct
from dataclasses import dataclass

import numpy as np

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config import BCSR_BLOCK, BCSR_MAGIC, CONTAINER_VERSION, U16_MAX
from encoders.container import SectionReader, SectionWriter
from encoders.footprint import FootprintBreakdown
from errors import FormatError, FormatLimitError
from matrix.dense import DenseMatrixI8

logger = logging.getLogger(__name__)

_HEADER = struct.Struct("<4sBBBBIII")
BH, BW = BCSR_BLOCK


@dataclass(frozen=True, eq=False)
class BcsrMatrix:
    """
    Blocked matrix; odd dimensions are padded virtually with a zero row/column.

    ``block_values`` holds BH*BW row-major values per stored block.
    """

    rows: int
    cols: int
    block_values: np.ndarray
    block_col_idx: np.ndarray
    block_row_ptr: np.ndarray

    @property
    def block_rows(self) -> int:
        return -(-self.rows // BH)

    @property
    def block_cols(self) -> int:
        return -(-self.cols // BW)

    @property
    def nblocks(self) -> int:
        return int(self.block_col_idx.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BcsrMatrix):
            return NotImplemented
        return (
            (self.rows, self.cols) == (other.rows, other.cols)
            and np.array_equal(self.block_values, other.block_values)
            and np.array_equal(self.block_col_idx, other.block_col_idx)
            and np.array_equal(self.block_row_ptr, other.block_row_ptr)
        )


def _padded(m: DenseMatrixI8) -> np.ndarray:
    padded = np.zeros((-(-m.rows // BH) * BH, -(-m.cols // BW) * BW), dtype=np.int8)
    padded[:m.rows, :m.cols] = m.data
    return padded


def encode_bcsr(m: DenseMatrixI8) -> BcsrMatrix:
    """
    Store every 2x2 block that holds at least one non-zero.

    Raises:
        FormatLimitError: Block count or block column index exceeds 16 bits
    """
    padded = _padded(m)
    br, bc = padded.shape[0] // BH, padded.shape[1] // BW
    blocks = padded.reshape(br, BH, bc, BW).transpose(0, 2, 1, 3)
    occupied = blocks.reshape(br, bc, BH * BW).any(axis=2)

    nblocks = int(occupied.sum())
    if nblocks > U16_MAX:
        raise FormatLimitError(f"BCSR with 16-bit row pointers holds at most {U16_MAX} blocks, need {nblocks}")
    if bc - 1 > U16_MAX:
        raise FormatLimitError(f"BCSR block column indices cannot address {bc} block columns")

    block_rows, block_cols = np.nonzero(occupied)
    row_ptr = np.concatenate(([0], np.cumsum(occupied.sum(axis=1))))
    return BcsrMatrix(
        rows=m.rows,
        cols=m.cols,
        block_values=blocks[block_rows, block_cols].reshape(-1).astype(np.int8),
        block_col_idx=block_cols.astype(np.uint16),
        block_row_ptr=row_ptr.astype(np.uint16),
    )


def decode_bcsr(b: BcsrMatrix) -> DenseMatrixI8:
    ptr = b.block_row_ptr.astype(np.int64)
    if ptr.size != b.block_rows + 1 or ptr[0] != 0 or np.any(np.diff(ptr) < 0) or ptr[-1] != b.nblocks:
        raise FormatError("BCSR block_row_ptr is inconsistent with the block arrays")
    if b.block_values.size != b.nblocks * BH * BW:
        raise FormatError("BCSR block_values length does not match the block count")
    if b.nblocks and int(b.block_col_idx.max()) >= b.block_cols:
        raise FormatError("BCSR block column index outside the matrix")

    padded = np.zeros((b.block_rows, b.block_cols, BH, BW), dtype=np.int8)
    block_row_of = np.repeat(np.arange(b.block_rows), np.diff(ptr))
    padded[block_row_of, b.block_col_idx.astype(np.int64)] = b.block_values.reshape(-1, BH, BW)
    data = padded.transpose(0, 2, 1, 3).reshape(b.block_rows * BH, b.block_cols * BW)
    if np.any(data[b.rows:, :]) or np.any(data[:, b.cols:]):
        raise FormatError("BCSR virtual padding row/column holds non-zero values")
    return DenseMatrixI8(b.rows, b.cols, data[:b.rows, :b.cols])


def footprint_bcsr(b: BcsrMatrix) -> FootprintBreakdown:
    """Explicit zeros inside stored blocks count as padding."""
    stored = b.nblocks * BH * BW
    nonzero = int(np.count_nonzero(b.block_values))
    return FootprintBreakdown(
        format="bcsr",
        rows=b.rows,
        cols=b.cols,
        values_bytes=nonzero,
        padding_bytes=stored - nonzero,
        metadata_bytes=b.nblocks * 2 + (b.block_rows + 1) * 2,
        components={"block_col_idx": b.nblocks * 2, "block_row_ptr": (b.block_rows + 1) * 2},
    )


def serialize_bcsr(b: BcsrMatrix) -> bytes:
    writer = SectionWriter(
        _HEADER.pack(BCSR_MAGIC, CONTAINER_VERSION, BH, BW, 0, b.rows, b.cols, b.nblocks)
    )
    writer.add(b.block_row_ptr, "u2")
    writer.add(b.block_col_idx, "u2")
    writer.add(b.block_values, "i1")
    return writer.finish()


def deserialize_bcsr(blob: bytes) -> BcsrMatrix:
    reader = SectionReader(blob, _HEADER, BCSR_MAGIC)
    _, version, bh, bw, _, rows, cols, nblocks = reader.header
    if version != CONTAINER_VERSION:
        raise FormatError(f"Unsupported BCSR container version {version}")
    if (bh, bw) != BCSR_BLOCK:
        raise FormatError(f"Unsupported block shape ({bh}, {bw})")
    block_rows = -(-rows // BH)
    row_ptr = reader.read(block_rows + 1, "u2", "block_row_ptr")
    col_idx = reader.read(nblocks, "u2", "block_col_idx")
    values = reader.read(nblocks * BH * BW, "i1", "block_values")
    reader.finish()
    return BcsrMatrix(rows, cols, values, col_idx, row_ptr)
