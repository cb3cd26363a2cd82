"""Fixed-point requantization of 32-bit accumulators to int8 outputs."""
from dataclasses import dataclass

import numpy as np

I8_MIN = -128
I8_MAX = 127


@dataclass(frozen=True)
class RequantSpec:
    """Per-tensor output scale ``multiplier / 2^shift`` and output zero point."""

    multiplier: int = 1
    shift: int = 0
    output_zero_point: int = 0

    def __post_init__(self):
        if not 0 < self.multiplier <= 0x7FFFFFFF:
            raise ValueError(f"multiplier must be a positive 32-bit integer, got {self.multiplier}")
        if not 0 <= self.shift <= 31:
            raise ValueError(f"shift must lie in [0, 31], got {self.shift}")
        if not -32768 <= self.output_zero_point <= 32767:
            raise ValueError(f"output_zero_point must fit 16 bits, got {self.output_zero_point}")


def _rounding_shift(scaled: int, shift: int) -> int:
    if shift == 0:
        return scaled
    half = 1 << (shift - 1)
    if scaled >= 0:
        return (scaled + half) >> shift
    return -((-scaled + half) >> shift)


def requantize(acc: int, spec: RequantSpec) -> int:
    """
    Scale an accumulator to int8.

    ``clamp(zp + round_half_away_from_zero(acc * multiplier / 2^shift))``
    in exact integer arithmetic.
    """
    q = spec.output_zero_point + _rounding_shift(int(acc) * spec.multiplier, spec.shift)
    return max(I8_MIN, min(I8_MAX, q))


def requantize_array(acc: np.ndarray, spec: RequantSpec) -> np.ndarray:
    """Vectorised ``requantize`` over an accumulator array of any shape."""
    scaled = np.asarray(acc, dtype=np.int64) * np.int64(spec.multiplier)
    if spec.shift:
        half = np.int64(1 << (spec.shift - 1))
        magnitude = (np.abs(scaled) + half) >> spec.shift
        scaled = np.where(scaled >= 0, magnitude, -magnitude)
    out = np.clip(scaled + spec.output_zero_point, I8_MIN, I8_MAX)
    return out.astype(np.int8)
