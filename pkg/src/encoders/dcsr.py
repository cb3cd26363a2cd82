"""Whole-matrix dCSR container: build, decode, serialize and account."""
import logging
import struct
from dataclasses import dataclass, fields
from functools import cached_property
from typing import Iterator, Optional

import numpy as np

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config import (
    DEFAULT_GROUP_SIZE, SUPPORTED_GROUP_SIZES, BASE_BITS, CONTAINER_VERSION,
    DCSR_MAGIC, FLAG_CRC32, SECTION_ALIGNMENT
)
from encoders.container import SectionReader, SectionWriter
from encoders.dbe import decompose_group, interleave_pair, mask_bytes, recompose_lanes
from encoders.dle import DleParams, encode_row
from encoders.footprint import FootprintBreakdown
from engine.vector_engine import VectorEngine
from errors import ConstraintViolationError, EngineFault, FormatError
from matrix.dense import DenseMatrixI8, to_sparse_rows

logger = logging.getLogger(__name__)

_HEADER = struct.Struct("<4sBBBBIIIII")
_POPCOUNT = np.array([bin(t).count("1") for t in range(256)], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class DcsrMatrix:
    """
    Encoded matrix as flat streams.

    row_ptr and mask_ptr have rows + 1 entries and index the values stream
    and the mask list; intercept_deltas and tracking hold one byte per group
    of all rows in order; base_nibbles holds ceil(groups / 2) * g bytes per
    row; masks holds mask_bytes(g) bytes per mask.
    """

    rows: int
    cols: int
    group_size: int
    row_ptr: np.ndarray
    slopes: np.ndarray
    mask_ptr: np.ndarray
    intercept_deltas: np.ndarray
    tracking: np.ndarray
    base_nibbles: np.ndarray
    masks: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        dtypes = {
            "row_ptr": np.uint32, "slopes": np.uint16, "mask_ptr": np.uint32,
            "intercept_deltas": np.int8, "tracking": np.uint8,
            "base_nibbles": np.uint8, "masks": np.uint8, "values": np.int8,
        }
        for name, dtype in dtypes.items():
            array = np.ascontiguousarray(getattr(self, name), dtype=dtype)
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @cached_property
    def element_counts(self) -> np.ndarray:
        return np.diff(self.row_ptr.astype(np.int64))

    @cached_property
    def group_counts(self) -> np.ndarray:
        return -(-self.element_counts // self.group_size)

    @cached_property
    def group_ptr(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(self.group_counts)))

    @cached_property
    def nibble_ptr(self) -> np.ndarray:
        per_row = -(-self.group_counts // 2) * self.group_size
        return np.concatenate(([0], np.cumsum(per_row)))

    @property
    def mask_width(self) -> int:
        return mask_bytes(self.group_size)

    @property
    def total_elements(self) -> int:
        return int(self.values.size)

    @property
    def total_groups(self) -> int:
        return int(self.tracking.size)

    @property
    def total_masks(self) -> int:
        return int(self.masks.size // self.mask_width)

    def row_masks(self, r: int) -> Iterator[int]:
        """Masks of row r as integers, lane i in bit i."""
        width = self.mask_width
        for k in range(int(self.mask_ptr[r]), int(self.mask_ptr[r + 1])):
            yield int.from_bytes(self.masks[k * width:(k + 1) * width].tobytes(), "little")

    def validate(self) -> None:
        """
        Check stream lengths and cross-stream invariants.

        Raises:
            FormatError: Any invariant of the container does not hold
        """
        if self.rows < 1 or self.cols < 1:
            raise FormatError(f"Container has empty shape {self.rows}x{self.cols}")
        if self.group_size not in SUPPORTED_GROUP_SIZES:
            raise FormatError(f"Unsupported group size {self.group_size}")
        for name, length in (("row_ptr", self.rows + 1), ("mask_ptr", self.rows + 1), ("slopes", self.rows)):
            if getattr(self, name).size != length:
                raise FormatError(f"{name} has {getattr(self, name).size} entries, expected {length}")
        for name in ("row_ptr", "mask_ptr"):
            ptr = getattr(self, name).astype(np.int64)
            if ptr[0] != 0 or np.any(np.diff(ptr) < 0):
                raise FormatError(f"{name} must start at 0 and be non-decreasing")
        if int(self.row_ptr[-1]) != self.values.size:
            raise FormatError(f"row_ptr ends at {self.row_ptr[-1]}, values has {self.values.size}")
        if np.any(self.element_counts > self.cols):
            raise FormatError("A row stores more elements than the matrix has columns")

        total_groups = int(self.group_ptr[-1])
        for name in ("intercept_deltas", "tracking"):
            if getattr(self, name).size != total_groups:
                raise FormatError(f"{name} has {getattr(self, name).size} entries, expected {total_groups}")
        if int(self.nibble_ptr[-1]) != self.base_nibbles.size:
            raise FormatError(
                f"base_nibbles has {self.base_nibbles.size} bytes, expected {self.nibble_ptr[-1]}"
            )
        if np.any(self.tracking > 0b111):
            raise FormatError("Tracking bitmap uses bits beyond the extensible positions")
        if self.masks.size != int(self.mask_ptr[-1]) * self.mask_width:
            raise FormatError(
                f"masks has {self.masks.size} bytes, mask_ptr announces {self.mask_ptr[-1]} masks"
            )

        cum_pop = np.concatenate(([0], np.cumsum(_POPCOUNT[self.tracking])))
        per_row = cum_pop[self.group_ptr[1:]] - cum_pop[self.group_ptr[:-1]]
        if not np.array_equal(per_row, np.diff(self.mask_ptr.astype(np.int64))):
            raise FormatError("Tracking bitmaps and mask_ptr disagree on mask counts")

    def __eq__(self, other) -> bool:
        if not isinstance(other, DcsrMatrix):
            return NotImplemented
        for f in fields(self):
            mine, theirs = getattr(self, f.name), getattr(other, f.name)
            if isinstance(mine, np.ndarray):
                if not np.array_equal(mine, theirs):
                    return False
            elif mine != theirs:
                return False
        return True


@dataclass(frozen=True)
class DecodedGroup:
    """Base pointer, lane offsets and value slice of one recomposed group."""

    index: int
    base: int
    offsets: np.ndarray
    active: np.ndarray
    lanes: int
    value_start: int


def encode_matrix(m: DenseMatrixI8, group_size: int = DEFAULT_GROUP_SIZE) -> DcsrMatrix:
    """
    Encode a dense matrix into dCSR.

    Each row is padded until encodable, delta-linear decomposed and every
    group split into base nibbles, tracking bitmap and extension masks.

    Args:
        m: Dense int8 matrix
        group_size: Lane count g

    Returns:
        DcsrMatrix holding the original non-zeros and zero padding values
    """
    params = DleParams(dense_row_length=m.cols, group_size=group_size)
    width = mask_bytes(group_size)

    row_ptr, mask_ptr, slopes = [0], [0], []
    intercepts, tracking, nibbles, masks, values = [], [], [], [], []
    padding_total = 0

    for r, row in enumerate(to_sparse_rows(m)):
        enc = encode_row(row.columns, params)
        if not enc.report.ok:
            raise ConstraintViolationError(f"Row {r} violates {enc.report.violations()} after padding")

        row_values = np.zeros(enc.element_count, dtype=np.int8)
        row_values[np.searchsorted(enc.padded_columns, row.columns)] = row.values
        values.append(row_values)
        padding_total += len(enc.padding_positions)

        groups = [decompose_group(gd.lane_deltas, group_size) for gd in enc.groups]
        for gd, eg in zip(enc.groups, groups):
            intercepts.append(gd.intercept_delta)
            tracking.append(eg.tracking_bitmap)
            masks.extend(mask.to_bytes(width, "little") for mask in eg.masks)
        for k in range(0, len(groups), 2):
            second = groups[k + 1] if k + 1 < len(groups) else None
            nibbles.append(interleave_pair(groups[k], second, group_size))

        slopes.append(enc.slope)
        row_ptr.append(row_ptr[-1] + enc.element_count)
        mask_ptr.append(mask_ptr[-1] + sum(len(eg.masks) for eg in groups))

    logger.debug(
        f"Encoded {m.rows}x{m.cols} matrix: {m.nnz} non-zeros, {padding_total} padding, "
        f"{len(tracking)} groups, {mask_ptr[-1]} masks"
    )
    return DcsrMatrix(
        rows=m.rows,
        cols=m.cols,
        group_size=group_size,
        row_ptr=np.array(row_ptr, dtype=np.uint32),
        slopes=np.array(slopes, dtype=np.uint16),
        mask_ptr=np.array(mask_ptr, dtype=np.uint32),
        intercept_deltas=np.array(intercepts, dtype=np.int8),
        tracking=np.array(tracking, dtype=np.uint8),
        base_nibbles=np.frombuffer(b"".join(nibbles), dtype=np.uint8),
        masks=np.frombuffer(b"".join(masks), dtype=np.uint8),
        values=np.concatenate(values) if values else np.zeros(0, dtype=np.int8),
    )


def decode_row_groups(d: DcsrMatrix, r: int, engine: VectorEngine) -> Iterator[DecodedGroup]:
    """
    Run the runtime decode pipeline for one row on the vector engine.

    Interleaved nibbles are loaded once per pair of groups and split by
    shift/and; each group is recomposed from its masks, lane offsets are
    formed as ``lane * m + delta`` and the base pointer is chained from the
    stored intercept deltas.

    Args:
        d: Container
        r: Row index
        engine: Engine whose lane count equals the container group size

    Yields:
        DecodedGroup per group of the row, in order

    Raises:
        FormatError: The row's streams are inconsistent
    """
    g = d.group_size
    if engine.group_size != g:
        raise ValueError(f"Engine has {engine.group_size} lanes, container uses {g}")

    start = int(d.row_ptr[r])
    count = int(d.row_ptr[r + 1]) - start
    groups = int(d.group_counts[r])
    first_group = int(d.group_ptr[r])
    nibble_start = int(d.nibble_ptr[r])
    m = int(d.slopes[r])
    masks = d.row_masks(r)
    n = 0

    for pair in range(0, groups, 2):
        block = engine.load_i8(d.base_nibbles, nibble_start + (pair // 2) * g)
        halves = [engine.shr4(block)]
        if pair + 1 < groups:
            halves.append(engine.and_0f(block))

        for j, nibbles in enumerate(halves, start=pair):
            lanes = min(g, count - j * g)
            active = engine.tail_predicate(lanes)
            deltas = recompose_lanes(nibbles, int(d.tracking[first_group + j]), masks, engine)
            try:
                offsets = engine.add_lane_index_scaled(m, deltas, active)
            except EngineFault as e:
                raise FormatError(f"Row {r} group {j}: {e}") from e
            delta_n = int(d.intercept_deltas[first_group + j])
            n = delta_n if j == 0 else n + m * g + delta_n
            yield DecodedGroup(j, n, offsets, active, lanes, start + j * g)

    if next(masks, None) is not None:
        raise FormatError(f"Row {r}: extension masks left after the last group")


def decode_matrix(d: DcsrMatrix, engine: Optional[VectorEngine] = None) -> DenseMatrixI8:
    """
    Decode a container back to the dense matrix it was built from.

    Raises:
        FormatError: Streams violate the container invariants or decode to
            columns outside the row or out of order
    """
    d.validate()
    engine = engine or VectorEngine(d.group_size)
    data = np.zeros((d.rows, d.cols), dtype=np.int8)

    for r in range(d.rows):
        previous = -1
        for group in decode_row_groups(d, r, engine):
            columns = group.base + group.offsets[:group.lanes].astype(np.int64)
            if columns[0] <= previous or np.any(np.diff(columns) <= 0):
                raise FormatError(f"Row {r} group {group.index}: columns not strictly ascending")
            if columns[0] < 0 or columns[-1] >= d.cols:
                raise FormatError(f"Row {r} group {group.index}: columns outside [0, {d.cols})")
            data[r, columns] = d.values[group.value_start:group.value_start + group.lanes]
            previous = int(columns[-1])

    return DenseMatrixI8(d.rows, d.cols, data)


def serialize(d: DcsrMatrix, with_crc: bool = False) -> bytes:
    """Serialize a container into the sectioned little-endian binary layout."""
    header = _HEADER.pack(
        DCSR_MAGIC, CONTAINER_VERSION, d.group_size, BASE_BITS,
        FLAG_CRC32 if with_crc else 0,
        d.rows, d.cols, d.total_elements, d.total_groups, d.total_masks,
    )
    writer = SectionWriter(header)
    writer.add(d.row_ptr, "u4")
    writer.add(d.slopes, "u2")
    writer.add(d.mask_ptr, "u4")
    writer.add(d.intercept_deltas, "i1")
    writer.add(d.tracking, "u1")
    writer.add(d.base_nibbles, "u1")
    writer.add(d.masks, "u1")
    writer.add(d.values, "i1")
    return writer.finish(with_crc)


def deserialize(blob: bytes) -> DcsrMatrix:
    """
    Parse a serialized container.

    Raises:
        FormatError: Bad magic, unsupported version or parameters, section
            overrun, non-zero fill, CRC mismatch or inconsistent streams
    """
    reader = SectionReader(blob, _HEADER, DCSR_MAGIC)
    _, version, g, base_bits, flags, rows, cols, elements, groups, mask_count = reader.header
    if version != CONTAINER_VERSION:
        raise FormatError(f"Unsupported container version {version}")
    if g not in SUPPORTED_GROUP_SIZES:
        raise FormatError(f"Unsupported group size {g}")
    if base_bits != BASE_BITS:
        raise FormatError(f"Unsupported base width {base_bits}")
    if flags & ~FLAG_CRC32:
        raise FormatError(f"Unknown flags {flags:#04x}")
    if flags & FLAG_CRC32:
        reader.verify_crc()

    row_ptr = reader.read(rows + 1, "u4", "row_ptr")
    slopes = reader.read(rows, "u2", "slopes")
    mask_ptr = reader.read(rows + 1, "u4", "mask_ptr")
    intercepts = reader.read(groups, "i1", "intercept_deltas")
    tracking = reader.read(groups, "u1", "tracking")

    counts = np.diff(row_ptr.astype(np.int64))
    if np.any(counts < 0):
        raise FormatError("row_ptr is not non-decreasing")
    group_counts = -(-counts // g)
    nibble_bytes = int(np.sum(-(-group_counts // 2))) * g
    base_nibbles = reader.read(nibble_bytes, "u1", "base_nibbles")
    masks = reader.read(mask_count * mask_bytes(g), "u1", "masks")
    values = reader.read(elements, "i1", "values")
    reader.finish()

    d = DcsrMatrix(rows, cols, g, row_ptr, slopes, mask_ptr, intercepts, tracking,
                   base_nibbles, masks, values)
    d.validate()
    return d


def footprint(d: DcsrMatrix) -> FootprintBreakdown:
    """
    Byte accounting of the container's core streams.

    Header and alignment fill are reported as container overhead.
    """
    nonzero = int(np.count_nonzero(d.values))
    components = {
        "row_ptr": d.row_ptr.nbytes,
        "mask_ptr": d.mask_ptr.nbytes,
        "slopes": d.slopes.nbytes,
        "intercept_deltas": d.intercept_deltas.nbytes,
        "tracking": d.tracking.nbytes,
        "base_nibbles": d.base_nibbles.nbytes,
        "masks": d.masks.nbytes,
    }
    core = sum(components.values()) + d.values.nbytes
    sections = [getattr(d, name).nbytes for name in components] + [d.values.nbytes]
    aligned = sum(s + (-s % SECTION_ALIGNMENT) for s in sections)
    return FootprintBreakdown(
        format="dcsr",
        rows=d.rows,
        cols=d.cols,
        values_bytes=nonzero,
        padding_bytes=d.total_elements - nonzero,
        metadata_bytes=sum(components.values()),
        components=components,
        container_overhead_bytes=_HEADER.size + aligned - core,
    )


def group_metadata_bytes(fp: FootprintBreakdown) -> int:
    """Metadata without the per-row tables: nibbles, tracking, masks, intercepts."""
    c = fp.components
    return c["base_nibbles"] + c["tracking"] + c["masks"] + c["intercept_deltas"]
