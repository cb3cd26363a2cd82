"""SpMV and SpMM kernels that decompress dCSR on the vector engine.

SpMV feeds every recomposed group straight into a gather on the activation
vector. SpMM decodes each weight row once into a row buffer and reuses it
for every pixel: either the dense weight row (value buffering) or the
recomposed offsets and base pointers (index buffering).
"""
import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from encoders.dcsr import DcsrMatrix, decode_row_groups
from engine.vector_engine import VectorEngine
from kernels.dense import ActivationsLike, as_activations, as_vector, bias_vector, finalize
from kernels.parallel import map_rows
from kernels.requant import RequantSpec

logger = logging.getLogger(__name__)


def _engine_for(W: DcsrMatrix, engine: Optional[VectorEngine]) -> VectorEngine:
    engine = engine or VectorEngine(W.group_size)
    if engine.group_size != W.group_size:
        raise ValueError(f"Engine has {engine.group_size} lanes, matrix uses {W.group_size}")
    return engine


def _row_weight_sum(W: DcsrMatrix, r: int) -> int:
    return int(W.values[int(W.row_ptr[r]):int(W.row_ptr[r + 1])].astype(np.int64).sum())


@dataclass
class ValueRowBuffer:
    """Dense weight row rebuilt by scattering the decoded values."""

    values: np.ndarray
    weight_sum: int


@dataclass
class IndexRowBuffer:
    """
    Recomposed indices of one weight row.

    Holds one entry per group: base pointer, lane offsets, lane predicate
    and the group's weight lanes. Its size is bounded by one matrix row.
    """

    bases: List[int]
    offsets: List[np.ndarray]
    active: List[np.ndarray]
    weights: List[np.ndarray]
    weight_sum: int

    def __len__(self) -> int:
        return len(self.bases)


def build_value_buffer(W: DcsrMatrix, r: int, engine: VectorEngine) -> ValueRowBuffer:
    buffer = np.zeros(W.cols, dtype=np.int8)
    for group in decode_row_groups(W, r, engine):
        weights = engine.load_i8(W.values, group.value_start, group.active)
        engine.scatter_i8(buffer, group.base, group.offsets, weights, group.active)
    return ValueRowBuffer(buffer, _row_weight_sum(W, r))


def build_index_buffer(W: DcsrMatrix, r: int, engine: VectorEngine) -> IndexRowBuffer:
    rb = IndexRowBuffer([], [], [], [], _row_weight_sum(W, r))
    for group in decode_row_groups(W, r, engine):
        rb.bases.append(group.base)
        rb.offsets.append(group.offsets)
        rb.active.append(group.active)
        rb.weights.append(engine.load_i8(W.values, group.value_start, group.active))
    return rb


def dcsr_spmv(
    W: DcsrMatrix,
    x,
    x_zp: int = 0,
    bias=None,
    rq: Optional[RequantSpec] = None,
    engine: Optional[VectorEngine] = None,
    workers: Optional[int] = None,
) -> np.ndarray:
    """
    Matrix-vector product with direct SIMD decompression.

    Each group's offsets address the activation vector through one gather
    at the group's base pointer. Padding elements hold weight 0.

    Returns:
        int64 accumulators, or int8 outputs when ``rq`` is given
    """
    engine = _engine_for(W, engine)
    W.validate()
    x = as_vector(x, W.cols)
    bias = bias_vector(bias, W.rows)

    def run_row(r: int, e: VectorEngine) -> int:
        acc = int(bias[r]) - x_zp * _row_weight_sum(W, r)
        for group in decode_row_groups(W, r, e):
            activations = e.gather_i8(x, group.base, group.offsets, group.active)
            weights = e.load_i8(W.values, group.value_start, group.active)
            acc = e.dot_acc_i32(weights, activations, group.active, acc)
        return acc

    return finalize(map_rows(run_row, W.rows, engine, workers), rq)


def dcsr_spmm_vb(
    W: DcsrMatrix,
    A: ActivationsLike,
    x_zp: int = 0,
    bias=None,
    rq: Optional[RequantSpec] = None,
    engine: Optional[VectorEngine] = None,
    workers: Optional[int] = None,
) -> np.ndarray:
    """
    Value-buffered pointwise kernel.

    The weight row is scattered into a zero-initialized dense buffer once,
    then every pixel runs the dense dot product against it, so the MAC
    count equals the dense kernel's.

    Returns:
        pixels x rows outputs
    """
    engine = _engine_for(W, engine)
    W.validate()
    A = as_activations(A, W.cols)
    bias = bias_vector(bias, W.rows)
    g = engine.group_size

    def run_row(r: int, e: VectorEngine) -> List[int]:
        rb = build_value_buffer(W, r, e)
        chunks = []
        for start in range(0, W.cols, g):
            active = e.tail_predicate(min(g, W.cols - start))
            chunks.append((start, active, e.load_i8(rb.values, start, active)))
        init = int(bias[r]) - x_zp * rb.weight_sum

        out = []
        for p in range(A.shape[0]):
            acc = init
            for start, active, weights in chunks:
                acc = e.dot_acc_i32(weights, e.load_i8(A[p], start, active), active, acc)
            out.append(acc)
        return out

    acc = np.array(map_rows(run_row, W.rows, engine, workers), dtype=np.int64)
    return finalize(acc.reshape(W.rows, A.shape[0]).T, rq)


def dcsr_spmm_ib(
    W: DcsrMatrix,
    A: ActivationsLike,
    x_zp: int = 0,
    bias=None,
    rq: Optional[RequantSpec] = None,
    engine: Optional[VectorEngine] = None,
    workers: Optional[int] = None,
) -> np.ndarray:
    """
    Index-buffered pointwise kernel.

    Offsets and base pointers of a weight row are recomposed once and kept;
    every pixel then issues one gather per group, so only stored elements
    (non-zeros and padding) are multiplied.

    Returns:
        pixels x rows outputs
    """
    engine = _engine_for(W, engine)
    W.validate()
    A = as_activations(A, W.cols)
    bias = bias_vector(bias, W.rows)

    def run_row(r: int, e: VectorEngine) -> List[int]:
        rb = build_index_buffer(W, r, e)
        init = int(bias[r]) - x_zp * rb.weight_sum

        out = []
        for p in range(A.shape[0]):
            acc = init
            for k in range(len(rb)):
                activations = e.gather_i8(A[p], rb.bases[k], rb.offsets[k], rb.active[k])
                acc = e.dot_acc_i32(rb.weights[k], activations, rb.active[k], acc)
            out.append(acc)
        return out

    acc = np.array(map_rows(run_row, W.rows, engine, workers), dtype=np.int64)
    return finalize(acc.reshape(W.rows, A.shape[0]).T, rq)
