from pathlib import Path

import numpy as np
import pytest

from engine.vector_engine import VectorEngine
from matrix.dense import DenseMatrixI8
from matrix.generator import GeneratorSpec, generate_uniform_sparse

DATA_DIR = Path(__file__).parent / "data"

EXAMPLE_COLUMNS = [0, 3, 7, 9, 12, 15]


@pytest.fixture
def example_row_matrix() -> DenseMatrixI8:
    """1x16 row with non-zeros 1..6 at columns 0, 3, 7, 9, 12, 15."""
    data = np.zeros((1, 16), dtype=np.int8)
    data[0, EXAMPLE_COLUMNS] = np.arange(1, 7)
    return DenseMatrixI8(1, 16, data)


@pytest.fixture
def small_matrix() -> DenseMatrixI8:
    return DenseMatrixI8.from_array([[0, -5], [0, 0]])


@pytest.fixture
def golden_bytes() -> bytes:
    return bytes.fromhex((DATA_DIR / "dcsr_1x16_g4.hex").read_text())


@pytest.fixture
def engine4() -> VectorEngine:
    return VectorEngine(4)


def random_matrix(rows: int, cols: int, sparsity: float, seed: int) -> DenseMatrixI8:
    return generate_uniform_sparse(GeneratorSpec(rows, cols, sparsity, seed))
