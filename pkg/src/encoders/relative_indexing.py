"""Relative Indexing: fixed-width column distances with zero padding for wide gaps."""
import logging
import struct
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config import CONTAINER_VERSION, DEFAULT_RI_BITS, RI_BITS_RANGE, RI_MAGIC, U16_MAX
from encoders.container import SectionReader, SectionWriter
from encoders.footprint import FootprintBreakdown
from errors import FormatError, FormatLimitError
from matrix.dense import DenseMatrixI8, to_sparse_rows

logger = logging.getLogger(__name__)

_HEADER = struct.Struct("<4sBBBBIIII")


def pack_bits(values: np.ndarray, bits: int) -> np.ndarray:
    """Pack unsigned values LSB-first into a byte stream of ``bits`` bits each."""
    values = np.asarray(values, dtype=np.int64)
    planes = (values[:, None] >> np.arange(bits)) & 1
    return np.packbits(planes.reshape(-1).astype(np.uint8), bitorder="little")


def unpack_bits(packed: np.ndarray, count: int, bits: int) -> np.ndarray:
    planes = np.unpackbits(np.asarray(packed, dtype=np.uint8), bitorder="little")
    if planes.size < count * bits:
        raise FormatError(f"Packed stream holds {planes.size} bits, need {count * bits}")
    planes = planes[:count * bits].reshape(count, bits).astype(np.int64)
    return planes @ (1 << np.arange(bits, dtype=np.int64))


@dataclass(frozen=True, eq=False)
class RiMatrix:
    """
    Per-row element streams with b-bit column distances.

    The first distance of a row is measured from column 0, later ones from
    the previous element. ``nonzero_count`` excludes padding elements.
    """

    rows: int
    cols: int
    delta_bits: int
    deltas: np.ndarray
    values: np.ndarray
    row_ptr: np.ndarray
    nonzero_count: int

    @property
    def element_count(self) -> int:
        return int(self.values.size)

    @property
    def padding_count(self) -> int:
        return self.element_count - self.nonzero_count

    @property
    def padding_fraction(self) -> float:
        return self.padding_count / self.nonzero_count if self.nonzero_count else 0.0

    def packed_deltas(self) -> np.ndarray:
        return pack_bits(self.deltas, self.delta_bits)

    def row_columns(self, r: int) -> Tuple[np.ndarray, np.ndarray]:
        """Columns (by cumulative sum) and values of row r, padding included."""
        start, end = int(self.row_ptr[r]), int(self.row_ptr[r + 1])
        return np.cumsum(self.deltas[start:end].astype(np.int64)), self.values[start:end]

    def __eq__(self, other) -> bool:
        if not isinstance(other, RiMatrix):
            return NotImplemented
        return (
            (self.rows, self.cols, self.delta_bits, self.nonzero_count)
            == (other.rows, other.cols, other.delta_bits, other.nonzero_count)
            and np.array_equal(self.deltas, other.deltas)
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.row_ptr, other.row_ptr)
        )


def _encode_row(columns: np.ndarray, values: np.ndarray, max_delta: int) -> Tuple[List[int], List[int]]:
    deltas, out_values = [], []
    position = 0
    for column, value in zip(columns.tolist(), values.tolist()):
        gap = column - position
        while gap > max_delta:
            deltas.append(max_delta)
            out_values.append(0)
            gap -= max_delta
        deltas.append(gap)
        out_values.append(value)
        position = column
    return deltas, out_values


def encode_ri(m: DenseMatrixI8, bits: int = DEFAULT_RI_BITS) -> RiMatrix:
    """
    Encode a matrix with b-bit relative column indices.

    A gap wider than 2^b - 1 is bridged by padding elements of distance
    2^b - 1 and value 0 until the remainder fits.

    Raises:
        ValueError: ``bits`` outside the supported range
        FormatLimitError: Element count exceeds the 16-bit row pointers
    """
    low, high = RI_BITS_RANGE
    if not low <= bits <= high:
        raise ValueError(f"Relative index width must lie in [{low}, {high}], got {bits}")
    max_delta = (1 << bits) - 1

    deltas, values, row_ptr = [], [], [0]
    for row in to_sparse_rows(m):
        row_deltas, row_values = _encode_row(row.columns, row.values, max_delta)
        deltas.extend(row_deltas)
        values.extend(row_values)
        row_ptr.append(len(values))

    if len(values) > U16_MAX:
        raise FormatLimitError(
            f"RI with 16-bit row pointers holds at most {U16_MAX} elements, need {len(values)}"
        )

    ri = RiMatrix(
        rows=m.rows,
        cols=m.cols,
        delta_bits=bits,
        deltas=np.array(deltas, dtype=np.uint8),
        values=np.array(values, dtype=np.int8),
        row_ptr=np.array(row_ptr, dtype=np.uint16),
        nonzero_count=m.nnz,
    )
    logger.debug(f"RI({bits}) encoded {ri.nonzero_count} non-zeros with {ri.padding_count} padding")
    return ri


def decode_ri(ri: RiMatrix) -> DenseMatrixI8:
    data = np.zeros((ri.rows, ri.cols), dtype=np.int8)
    ptr = ri.row_ptr.astype(np.int64)
    if ptr.size != ri.rows + 1 or ptr[0] != 0 or np.any(np.diff(ptr) < 0) or ptr[-1] != ri.element_count:
        raise FormatError("RI row_ptr is inconsistent with the element streams")
    for r in range(ri.rows):
        columns, values = ri.row_columns(r)
        if columns.size > 1 and np.any(np.diff(columns) == 0):
            raise FormatError(f"RI row {r} repeats a column (zero distance after its first element)")
        if columns.size and columns[-1] >= ri.cols:
            raise FormatError(f"RI row {r} runs past column {ri.cols}")
        data[r, columns] = values
    return DenseMatrixI8(ri.rows, ri.cols, data)


def footprint_ri(ri: RiMatrix) -> FootprintBreakdown:
    elements = ri.element_count
    delta_bytes = -(-elements * ri.delta_bits // 8)
    return FootprintBreakdown(
        format="ri",
        rows=ri.rows,
        cols=ri.cols,
        values_bytes=ri.nonzero_count,
        padding_bytes=ri.padding_count,
        metadata_bytes=delta_bytes + (ri.rows + 1) * 2,
        components={"deltas": delta_bytes, "row_ptr": (ri.rows + 1) * 2},
    )


def serialize_ri(ri: RiMatrix) -> bytes:
    writer = SectionWriter(_HEADER.pack(
        RI_MAGIC, CONTAINER_VERSION, ri.delta_bits, 0, 0,
        ri.rows, ri.cols, ri.element_count, ri.nonzero_count,
    ))
    writer.add(ri.row_ptr, "u2")
    writer.add(ri.packed_deltas(), "u1")
    writer.add(ri.values, "i1")
    return writer.finish()


def deserialize_ri(blob: bytes) -> RiMatrix:
    reader = SectionReader(blob, _HEADER, RI_MAGIC)
    _, version, bits, _, _, rows, cols, elements, nonzero = reader.header
    if version != CONTAINER_VERSION:
        raise FormatError(f"Unsupported RI container version {version}")
    if not RI_BITS_RANGE[0] <= bits <= RI_BITS_RANGE[1]:
        raise FormatError(f"Unsupported relative index width {bits}")
    row_ptr = reader.read(rows + 1, "u2", "row_ptr")
    packed = reader.read(-(-elements * bits // 8), "u1", "deltas")
    values = reader.read(elements, "i1", "values")
    reader.finish()
    deltas = unpack_bits(packed, elements, bits).astype(np.uint8)
    return RiMatrix(rows, cols, bits, deltas, values, row_ptr, nonzero)
