"""Synthetic pruned weight matrices and activations with uniformly random patterns."""
import logging
import math
from dataclasses import dataclass

import numpy as np

from matrix.dense import DenseMatrixI8

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GeneratorSpec:
    """Shape, sparsity and seed of a synthetic pruned matrix."""

    rows: int
    cols: int
    sparsity: float
    seed: int = 0

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0 or self.rows * self.cols == 0:
            raise ValueError(f"Generator needs a non-empty shape, got {self.rows}x{self.cols}")
        if not 0.0 <= self.sparsity < 1.0:
            raise ValueError(f"Sparsity must lie in [0, 1), got {self.sparsity}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"Seed must be an unsigned 64-bit integer, got {self.seed}")

    @property
    def nonzero_count(self) -> int:
        # round half up
        return int(math.floor((1.0 - self.sparsity) * self.rows * self.cols + 0.5))


def generate_uniform_sparse(spec: GeneratorSpec) -> DenseMatrixI8:
    """
    Generate a matrix with an exact number of non-zeros at uniformly random positions.

    Kept values are drawn uniformly from [-127, 127] without 0.

    Args:
        spec: Shape, sparsity and seed

    Returns:
        Deterministic matrix for the given spec
    """
    rng = np.random.default_rng(spec.seed)
    size = spec.rows * spec.cols
    nnz = spec.nonzero_count

    positions = rng.choice(size, size=nnz, replace=False)
    draws = rng.integers(0, 254, size=nnz)
    values = np.where(draws < 127, draws - 127, draws - 126)

    flat = np.zeros(size, dtype=np.int8)
    flat[positions] = values
    logger.debug(
        f"Generated {spec.rows}x{spec.cols} matrix with {nnz} non-zeros "
        f"(sparsity {spec.sparsity}, seed {spec.seed})"
    )
    return DenseMatrixI8(spec.rows, spec.cols, flat)


def generate_activations(pixels: int, cols: int, seed: int = 0) -> DenseMatrixI8:
    """
    Generate a pixel-major/channel-minor int8 activation matrix.

    Args:
        pixels: Number of activation pixels (rows of the result)
        cols: Number of channels, must equal the weight matrix column count
        seed: Seed of the random source

    Returns:
        Matrix of shape pixels x cols with values in [-128, 127]
    """
    if pixels < 1 or cols < 1:
        raise ValueError(f"Activation shape must be positive, got {pixels}x{cols}")
    rng = np.random.default_rng(seed)
    data = rng.integers(-128, 128, size=(pixels, cols), dtype=np.int16)
    return DenseMatrixI8(pixels, cols, data.astype(np.int8))
