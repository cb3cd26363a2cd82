"""Delta-Linear Encoding of one sparse row.

A column index at position p (group j = p // g, lane i = p % g) is predicted
as ``i * m + n_j`` with slope ``m`` and a per-group base pointer ``n_j``.
Only the per-lane deviation and the chained base-pointer deltas are stored.
"""
import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config import (
    DEFAULT_GROUP_SIZE, SUPPORTED_GROUP_SIZES, OFFSET_MAX, DELTA_MAX,
    INTERCEPT_DELTA_MIN, INTERCEPT_DELTA_MAX, MAX_DENSE_ROW_LENGTH
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DleParams:
    """Group size, row length and the bounds every encoded group must respect."""

    dense_row_length: int
    group_size: int = DEFAULT_GROUP_SIZE
    offset_max: int = OFFSET_MAX
    delta_max: int = DELTA_MAX
    intercept_delta_min: int = INTERCEPT_DELTA_MIN
    intercept_delta_max: int = INTERCEPT_DELTA_MAX

    def __post_init__(self):
        if self.group_size not in SUPPORTED_GROUP_SIZES:
            raise ValueError(
                f"Group size must be one of {SUPPORTED_GROUP_SIZES}, got {self.group_size}"
            )
        if not 1 <= self.dense_row_length <= MAX_DENSE_ROW_LENGTH:
            raise ValueError(
                f"Dense row length must lie in [1, {MAX_DENSE_ROW_LENGTH}], "
                f"got {self.dense_row_length}"
            )


@dataclass(frozen=True)
class GroupDeltas:
    lane_deltas: Tuple[int, ...]
    intercept_delta: int


@dataclass(frozen=True)
class ConstraintReport:
    """Which of the three bound families a candidate encoding violates."""

    delta_overflow: bool = False
    offset_overflow: bool = False
    intercept_overflow: bool = False

    @property
    def ok(self) -> bool:
        return not (self.delta_overflow or self.offset_overflow or self.intercept_overflow)

    def violations(self) -> List[str]:
        names = []
        if self.delta_overflow:
            names.append("delta_max")
        if self.offset_overflow:
            names.append("offset_max")
        if self.intercept_overflow:
            names.append("intercept_range")
        return names


@dataclass(frozen=True)
class RowEncoding:
    """
    Delta-linear form of one row.

    ``padding_positions`` index into ``padded_columns`` and mark inserted
    zero-valued elements.
    """

    slope: int
    padded_columns: Tuple[int, ...]
    padding_positions: Tuple[int, ...]
    groups: Tuple[GroupDeltas, ...]
    report: ConstraintReport = ConstraintReport()

    @property
    def element_count(self) -> int:
        return len(self.padded_columns)


def compute_slope(k_d: int, k_s: int) -> int:
    """
    Mean distance between stored elements, rounded half up.

    Args:
        k_d: Dense row length
        k_s: Number of stored elements in the row

    Returns:
        round(k_d / k_s), or 0 for an empty row
    """
    if k_s <= 0:
        return 0
    return (2 * k_d + k_s) // (2 * k_s)


def _group_arrays(cols: np.ndarray, params: DleParams):
    """Vectorised decomposition of one row: slope, lane deltas, group minima and intercept deltas."""
    g = params.group_size
    k_s = cols.size
    m = compute_slope(params.dense_row_length, k_s)
    lanes = np.arange(k_s, dtype=np.int64) % g
    dc = cols - lanes * m

    starts = np.arange(0, k_s, g)
    n = np.minimum.reduceat(dc, starts)
    lane_deltas = dc - np.repeat(n, np.diff(np.append(starts, k_s)))
    intercept_deltas = np.empty_like(n)
    intercept_deltas[0] = n[0]
    intercept_deltas[1:] = n[1:] - (n[:-1] + m * g)
    return m, lanes, lane_deltas, intercept_deltas


def check_constraints(columns: Sequence[int], params: DleParams) -> ConstraintReport:
    """Evaluate the three bound families for a candidate column list."""
    cols = np.asarray(columns, dtype=np.int64)
    if cols.size == 0:
        return ConstraintReport()
    m, lanes, lane_deltas, intercept_deltas = _group_arrays(cols, params)
    return ConstraintReport(
        delta_overflow=bool(np.any(lane_deltas > params.delta_max)),
        offset_overflow=bool(np.any(lanes * m + lane_deltas > params.offset_max)),
        intercept_overflow=bool(
            np.any(intercept_deltas < params.intercept_delta_min)
            or np.any(intercept_deltas > params.intercept_delta_max)
        ),
    )


def decompose_row(
    columns: Sequence[int], params: DleParams, padding_positions: Sequence[int] = ()
) -> RowEncoding:
    """
    Decompose an ascending column list into slope, group intercepts and lane deltas.

    The result always carries a ConstraintReport; a violating encoding is
    returned, not raised, so callers can decide to pad.

    Args:
        columns: Strictly ascending column indices below the dense row length
        params: Encoding parameters
        padding_positions: Positions in ``columns`` that hold inserted padding

    Returns:
        RowEncoding of the columns
    """
    cols = np.asarray(columns, dtype=np.int64)
    if cols.size > 1 and np.any(np.diff(cols) <= 0):
        raise ValueError("Columns must be strictly ascending")
    if cols.size and (cols[0] < 0 or cols[-1] >= params.dense_row_length):
        raise ValueError(f"Columns must lie in [0, {params.dense_row_length})")

    if cols.size == 0:
        return RowEncoding(0, (), tuple(padding_positions), ())

    g = params.group_size
    m, _, lane_deltas, intercept_deltas = _group_arrays(cols, params)
    groups = tuple(
        GroupDeltas(tuple(lane_deltas[s:s + g].tolist()), int(intercept_deltas[j]))
        for j, s in enumerate(range(0, cols.size, g))
    )
    return RowEncoding(
        slope=m,
        padded_columns=tuple(cols.tolist()),
        padding_positions=tuple(padding_positions),
        groups=groups,
        report=check_constraints(cols, params),
    )


def insert_padding(columns: Sequence[int], params: DleParams) -> Tuple[List[int], List[int]]:
    """
    Greedily insert padding columns until the row satisfies every bound.

    Each iteration places a new column at the middle of the largest gap,
    measured between consecutive stored columns and the virtual boundaries
    -1 and k_d; ties go to the leftmost gap. The slope is recomputed from
    the new element count on every retry.

    Args:
        columns: Strictly ascending original columns
        params: Encoding parameters

    Returns:
        (padded columns, positions of the inserted columns within them)
    """
    cols = np.asarray(columns, dtype=np.int64)
    k_d = params.dense_row_length
    inserted = set()

    while not check_constraints(cols, params).ok:
        bounds = np.concatenate(([-1], cols, [k_d]))
        gaps = np.diff(bounds)
        widest = int(np.argmax(gaps))
        # a fully dense row always satisfies the bounds
        assert gaps[widest] >= 2, "Row has no gap left to pad"
        left, right = int(bounds[widest]), int(bounds[widest + 1])
        new_column = (left + right) // 2
        cols = np.insert(cols, widest, new_column)
        inserted.add(new_column)

    padded = cols.tolist()
    positions = [p for p, c in enumerate(padded) if c in inserted]
    if positions:
        logger.debug(f"Inserted {len(positions)} padding elements into a row of {len(padded)}")
    return padded, positions


def encode_row(columns: Sequence[int], params: DleParams) -> RowEncoding:
    """Pad a row until it is encodable and decompose it."""
    padded, positions = insert_padding(columns, params)
    return decompose_row(padded, params, positions)


def reconstruct_columns(enc: RowEncoding, params: DleParams) -> List[int]:
    """
    Scalar reference reconstruction: c = i*m + delta + n_j with chained n_j.

    Args:
        enc: Row encoding
        params: Encoding parameters used to produce it

    Returns:
        Ascending column list including padding columns
    """
    g = params.group_size
    m = enc.slope
    columns = []
    n = 0
    for j, group in enumerate(enc.groups):
        n = group.intercept_delta if j == 0 else n + m * g + group.intercept_delta
        for i, delta in enumerate(group.lane_deltas):
            columns.append(i * m + delta + n)
    return columns
