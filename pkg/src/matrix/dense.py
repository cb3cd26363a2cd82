"""Dense and sparse-row matrix value types."""
import logging
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

logger = logging.getLogger(__name__)

I8_MIN = -128
I8_MAX = 127


@dataclass(frozen=True, eq=False)
class DenseMatrixI8:
    """Row-major signed 8-bit matrix, the ground truth every codec must reproduce."""

    rows: int
    cols: int
    data: np.ndarray

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"Matrix dimensions must be positive, got {self.rows}x{self.cols}")

        data = np.asarray(self.data)
        if data.size != self.rows * self.cols:
            raise ValueError(
                f"Matrix data has {data.size} entries, expected {self.rows * self.cols}"
            )
        if data.dtype != np.int8:
            if data.size and (data.min() < I8_MIN or data.max() > I8_MAX):
                raise ValueError("Matrix values must lie in [-128, 127]")
            data = data.astype(np.int8)

        data = np.ascontiguousarray(data.reshape(self.rows, self.cols))
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @classmethod
    def from_array(cls, array) -> "DenseMatrixI8":
        """Build a matrix from any 2-D array-like of integers."""
        array = np.asarray(array)
        if array.ndim != 2:
            raise ValueError(f"Expected a 2-D array, got {array.ndim} dimensions")
        return cls(array.shape[0], array.shape[1], array)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "DenseMatrixI8":
        return cls(rows, cols, np.zeros((rows, cols), dtype=np.int8))

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.data))

    @property
    def sparsity(self) -> float:
        return 1.0 - self.nnz / (self.rows * self.cols)

    def row(self, r: int) -> np.ndarray:
        return self.data[r]

    def __eq__(self, other) -> bool:
        if not isinstance(other, DenseMatrixI8):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and np.array_equal(self.data, other.data)
        )

    def __repr__(self) -> str:
        return f"DenseMatrixI8({self.rows}x{self.cols}, nnz={self.nnz})"


@dataclass(frozen=True, eq=False)
class SparseRow:
    """Non-zero entries of one matrix row, columns strictly ascending."""

    columns: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        columns = np.asarray(self.columns, dtype=np.int64)
        values = np.asarray(self.values)
        if columns.shape != values.shape or columns.ndim != 1:
            raise ValueError("SparseRow columns and values must be 1-D and of equal length")
        if columns.size > 1 and np.any(np.diff(columns) <= 0):
            raise ValueError("SparseRow columns must be strictly ascending")
        if columns.size and columns[0] < 0:
            raise ValueError("SparseRow columns must be non-negative")
        object.__setattr__(self, "columns", columns)
        object.__setattr__(self, "values", values.astype(np.int8))

    def __len__(self) -> int:
        return int(self.columns.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseRow):
            return NotImplemented
        return np.array_equal(self.columns, other.columns) and np.array_equal(
            self.values, other.values
        )


def to_sparse_rows(m: DenseMatrixI8) -> List[SparseRow]:
    """
    Split a dense matrix into its non-zero entries, row by row.

    Args:
        m: Dense matrix

    Returns:
        One SparseRow per matrix row, in row order
    """
    rows = []
    for r in range(m.rows):
        row = m.data[r]
        columns = np.flatnonzero(row)
        rows.append(SparseRow(columns, row[columns]))
    return rows


def densify(rows: Sequence[SparseRow], cols: int) -> DenseMatrixI8:
    """
    Scatter sparse rows back into a dense matrix.

    Args:
        rows: Sparse rows, one per matrix row
        cols: Number of matrix columns

    Returns:
        Dense matrix with zeros everywhere no entry was given
    """
    data = np.zeros((len(rows), cols), dtype=np.int8)
    for r, row in enumerate(rows):
        if len(row) and row.columns[-1] >= cols:
            raise ValueError(f"Row {r} has column {row.columns[-1]} outside {cols} columns")
        data[r, row.columns] = row.values
    return DenseMatrixI8(len(rows), cols, data)


@dataclass(frozen=True)
class QuantizationParams:
    """Zero points and fixed-point output scale of one quantized layer."""

    input_zero_point: int = 0
    output_zero_point: int = 0
    multiplier: int = 1
    shift: int = 0

    def __post_init__(self):
        for name in ("input_zero_point", "output_zero_point"):
            value = getattr(self, name)
            if not -32768 <= value <= 32767:
                raise ValueError(f"{name} must fit a signed 16-bit integer, got {value}")
        if not 0 < self.multiplier <= 0x7FFFFFFF:
            raise ValueError(f"multiplier must be a positive 32-bit integer, got {self.multiplier}")
        if not 0 <= self.shift <= 31:
            raise ValueError(f"shift must lie in [0, 31], got {self.shift}")

    def requant_spec(self):
        """Project onto the output-side parameters used by the kernels."""
        from kernels.requant import RequantSpec

        return RequantSpec(
            multiplier=self.multiplier,
            shift=self.shift,
            output_zero_point=self.output_zero_point,
        )
