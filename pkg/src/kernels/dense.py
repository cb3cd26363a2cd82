"""Dense reference kernels: the scalar oracle and the engine-counted dense baseline."""
import logging
from typing import Optional, Sequence, Union

import numpy as np

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from engine.vector_engine import VectorEngine
from errors import OracleMismatchError
from kernels.parallel import map_rows
from kernels.requant import RequantSpec, requantize_array
from matrix.dense import DenseMatrixI8

logger = logging.getLogger(__name__)

ActivationsLike = Union[DenseMatrixI8, np.ndarray, Sequence[Sequence[int]]]


def as_vector(x, cols: int) -> np.ndarray:
    """Validate an activation vector and return it as contiguous int8."""
    x = np.asarray(x)
    if x.ndim != 1 or x.size != cols:
        raise ValueError(f"Activation vector has shape {x.shape}, weights have {cols} columns")
    if x.dtype != np.int8:
        if x.size and (x.min() < -128 or x.max() > 127):
            raise ValueError("Activations must lie in [-128, 127]")
        x = x.astype(np.int8)
    return np.ascontiguousarray(x)


def as_activations(A: ActivationsLike, cols: int) -> np.ndarray:
    """Validate a pixel-major, channel-minor activation matrix and return it as int8."""
    data = A.data if isinstance(A, DenseMatrixI8) else np.asarray(A)
    if data.ndim != 2 or data.shape[1] != cols or data.shape[0] < 1:
        raise ValueError(f"Activations have shape {data.shape}, weights have {cols} columns")
    if data.dtype != np.int8:
        if data.size and (data.min() < -128 or data.max() > 127):
            raise ValueError("Activations must lie in [-128, 127]")
        data = data.astype(np.int8)
    return np.ascontiguousarray(data)


def bias_vector(bias, rows: int) -> np.ndarray:
    if bias is None:
        return np.zeros(rows, dtype=np.int64)
    bias = np.asarray(bias, dtype=np.int64)
    if bias.shape != (rows,):
        raise ValueError(f"Bias has shape {bias.shape}, expected ({rows},)")
    return bias


def finalize(acc: np.ndarray, rq: Optional[RequantSpec]) -> np.ndarray:
    """Raw int64 accumulators, or int8 outputs when a requantization spec is given."""
    acc = np.asarray(acc, dtype=np.int64)
    return acc if rq is None else requantize_array(acc, rq)


def dense_spmv(
    W: DenseMatrixI8,
    x,
    x_zp: int = 0,
    bias=None,
    rq: Optional[RequantSpec] = None,
) -> np.ndarray:
    """
    Oracle matrix-vector product ``y[r] = sum_c W[r, c] * (x[c] - x_zp) + bias[r]``.

    Computed in exact 64-bit integer arithmetic.

    Returns:
        int64 accumulators when ``rq`` is None, otherwise requantized int8 outputs
    """
    x = as_vector(x, W.cols).astype(np.int64) - x_zp
    acc = W.data.astype(np.int64) @ x + bias_vector(bias, W.rows)
    return finalize(acc, rq)


def dense_spmm_reference(
    W: DenseMatrixI8,
    A: ActivationsLike,
    x_zp: int = 0,
    bias=None,
    rq: Optional[RequantSpec] = None,
) -> np.ndarray:
    """Oracle for pointwise layers: one output row of W.rows channels per activation pixel."""
    A = as_activations(A, W.cols).astype(np.int64) - x_zp
    acc = A @ W.data.astype(np.int64).T + bias_vector(bias, W.rows)[None, :]
    return finalize(acc, rq)


def dense_spmm(
    W: DenseMatrixI8,
    A: ActivationsLike,
    x_zp: int = 0,
    bias=None,
    rq: Optional[RequantSpec] = None,
    engine: Optional[VectorEngine] = None,
    workers: Optional[int] = None,
) -> np.ndarray:
    """
    Dense pointwise kernel on the vector engine.

    Each weight row is loaded once in g-lane chunks and dotted with every
    pixel; the final chunk is tail-predicated.
    """
    engine = engine or VectorEngine()
    A = as_activations(A, W.cols)
    bias = bias_vector(bias, W.rows)
    g = engine.group_size

    def run_row(r: int, e: VectorEngine):
        row = W.data[r]
        chunks = []
        for start in range(0, W.cols, g):
            active = e.tail_predicate(min(g, W.cols - start))
            chunks.append((start, active, e.load_i8(row, start, active)))
        init = int(bias[r]) - x_zp * int(row.astype(np.int64).sum())

        out = []
        for p in range(A.shape[0]):
            acc = init
            for start, active, weights in chunks:
                acc = e.dot_acc_i32(weights, e.load_i8(A[p], start, active), active, acc)
            out.append(acc)
        return out

    acc = np.array(map_rows(run_row, W.rows, engine, workers), dtype=np.int64).reshape(W.rows, -1)
    return finalize(acc.T, rq)


def assert_matches_oracle(kernel: str, expected: np.ndarray, actual: np.ndarray) -> None:
    """
    Raises:
        OracleMismatchError: First differing output, in row-major order
    """
    expected = np.asarray(expected)
    actual = np.asarray(actual)
    if expected.shape != actual.shape:
        raise OracleMismatchError(kernel, ("shape",), expected.shape, actual.shape)
    diff = np.argwhere(expected.astype(np.int64) != actual.astype(np.int64))
    if diff.size:
        index = tuple(int(i) for i in diff[0])
        raise OracleMismatchError(kernel, index, int(expected[index]), int(actual[index]))
