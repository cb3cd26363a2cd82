"""Relative Indexing kernels: scalar index extraction, vector gather and MAC."""
import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config import OFFSET_MAX
from encoders.relative_indexing import RiMatrix
from engine.vector_engine import VectorEngine
from kernels.dense import ActivationsLike, as_activations, as_vector, bias_vector, finalize
from kernels.parallel import map_rows
from kernels.requant import RequantSpec

logger = logging.getLogger(__name__)


@dataclass
class RiRun:
    """One vector run: gather base, lane offsets, predicate and weight lanes."""

    base: int
    offsets: np.ndarray
    active: np.ndarray
    weights: np.ndarray


def extract_runs(ri: RiMatrix, r: int, engine: VectorEngine) -> List[RiRun]:
    """
    Split row r into vector runs.

    Columns come from a scalar running sum over the stored distances. A run
    holds at most g elements and spans at most OFFSET_MAX columns from its
    first element.
    """
    g = engine.group_size
    columns, _ = ri.row_columns(r)
    start = int(ri.row_ptr[r])
    runs = []
    i = 0
    while i < columns.size:
        j = i + 1
        while j < columns.size and j - i < g and columns[j] - columns[i] <= OFFSET_MAX:
            j += 1
        base = int(columns[i])
        active = engine.tail_predicate(j - i)
        offsets = engine.broadcast_lanes(columns[i:j] - base, active)
        weights = engine.load_i8(ri.values, start + i, active)
        runs.append(RiRun(base, offsets, active, weights))
        i = j
    return runs


def ri_spmm(
    W: RiMatrix,
    A: ActivationsLike,
    x_zp: int = 0,
    bias=None,
    rq: Optional[RequantSpec] = None,
    engine: Optional[VectorEngine] = None,
    workers: Optional[int] = None,
) -> np.ndarray:
    """
    Pointwise kernel over a Relative Indexing matrix.

    Runs are extracted once per weight row and gathered for every pixel.
    Padding elements multiply by zero.

    Returns:
        pixels x rows outputs
    """
    engine = engine or VectorEngine()
    A = as_activations(A, W.cols)
    bias = bias_vector(bias, W.rows)

    def run_row(r: int, e: VectorEngine) -> List[int]:
        runs = extract_runs(W, r, e)
        _, values = W.row_columns(r)
        init = int(bias[r]) - x_zp * int(values.astype(np.int64).sum())

        out = []
        for p in range(A.shape[0]):
            acc = init
            for run in runs:
                activations = e.gather_i8(A[p], run.base, run.offsets, run.active)
                acc = e.dot_acc_i32(run.weights, activations, run.active, acc)
            out.append(acc)
        return out

    acc = np.array(map_rows(run_row, W.rows, engine, workers), dtype=np.int64)
    return finalize(acc.reshape(W.rows, A.shape[0]).T, rq)


def ri_spmv(
    W: RiMatrix,
    x,
    x_zp: int = 0,
    bias=None,
    rq: Optional[RequantSpec] = None,
    engine: Optional[VectorEngine] = None,
    workers: Optional[int] = None,
) -> np.ndarray:
    x = as_vector(x, W.cols)
    return ri_spmm(W, x[None, :], x_zp, bias, rq, engine, workers)[0]
