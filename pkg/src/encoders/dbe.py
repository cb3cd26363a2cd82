"""Dynamic Bitwidth Extension of group lane deltas.

A group of lane deltas (each <= 127) is stored as 4-bit base values, one
byte-aligned lane bitmask per extensible bit position that some lane needs,
and a tracking bitmap recording which of the positions 4, 5, 6 carry a mask.
Base values of two consecutive groups share bytes: the first group in the
upper nibble, the second in the lower one.
"""
import logging
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config import BASE_BITS, DELTA_MAX, EXTENSION_BIT_POSITIONS
from engine.vector_engine import VectorEngine
from errors import FormatError

logger = logging.getLogger(__name__)

BASE_MASK = (1 << BASE_BITS) - 1


def mask_bytes(group_size: int) -> int:
    """Bytes occupied by one lane bitmask."""
    return (group_size + 7) // 8


@dataclass(frozen=True)
class EncodedGroup:
    base_nibbles: Tuple[int, ...]
    tracking_bitmap: int
    masks: Tuple[int, ...]

    def __post_init__(self):
        if any(not 0 <= n <= BASE_MASK for n in self.base_nibbles):
            raise ValueError("Base nibbles must lie in [0, 15]")
        if not 0 <= self.tracking_bitmap < (1 << len(EXTENSION_BIT_POSITIONS)):
            raise ValueError(f"Tracking bitmap {self.tracking_bitmap:#x} uses unknown positions")
        if len(self.masks) != bin(self.tracking_bitmap).count("1"):
            raise ValueError("Mask count does not match the tracking bitmap")
        if any(mask == 0 for mask in self.masks):
            raise ValueError("All-zero extension masks are never stored")


def decompose_group(lane_deltas: Sequence[int], group_size: int) -> EncodedGroup:
    """
    Split lane deltas into base nibbles, tracking bitmap and extension masks.

    Args:
        lane_deltas: Up to g values in [0, 127]
        group_size: Lane count g

    Returns:
        EncodedGroup with masks in ascending bit-position order
    """
    values = [int(v) for v in lane_deltas]
    if len(values) > group_size:
        raise ValueError(f"{len(values)} lane deltas exceed group size {group_size}")
    if any(not 0 <= v <= DELTA_MAX for v in values):
        raise ValueError(f"Lane deltas must lie in [0, {DELTA_MAX}], got {values}")

    nibbles = tuple(v & BASE_MASK for v in values)
    tracking = 0
    masks = []
    for t, bit in enumerate(EXTENSION_BIT_POSITIONS):
        mask = 0
        for lane, v in enumerate(values):
            if v >> bit & 1:
                mask |= 1 << lane
        if mask:
            tracking |= 1 << t
            masks.append(mask)
    return EncodedGroup(nibbles, tracking, tuple(masks))


def recompose_lanes(
    nibbles: np.ndarray, tracking: int, masks: Iterator[int], engine: VectorEngine
) -> np.ndarray:
    """
    Rebuild lane deltas on the engine from base nibbles and extension masks.

    For each extensible position whose tracking bit is set the next mask is
    consumed and the bit is or-ed into the lanes it selects.

    Args:
        nibbles: Lane vector of base values
        tracking: Tracking bitmap of the group
        masks: Iterator over the row's remaining masks
        engine: Vector engine to run on

    Returns:
        Lane vector of recomposed deltas

    Raises:
        FormatError: A tracking bit has no mask left to consume
    """
    lanes = nibbles
    for t, bit in enumerate(EXTENSION_BIT_POSITIONS):
        if not tracking >> t & 1:
            continue
        mask = next(masks, None)
        if mask is None:
            raise FormatError("Extension mask underrun: tracking bitmap asks for more masks")
        lanes = engine.masked_or_const(lanes, 1 << bit, engine.mask_predicate(mask))
    engine.counters.group_recompositions += 1
    return lanes


def recompose_group(enc: EncodedGroup, engine: VectorEngine) -> Tuple[int, ...]:
    """
    Inverse of decompose_group, executed on the vector engine.

    Raises:
        FormatError: Tracking bitmap and stored masks disagree
    """
    count = len(enc.base_nibbles)
    if count > engine.group_size:
        raise FormatError(f"Group of {count} lanes on a {engine.group_size}-lane engine")
    nibbles = engine.broadcast_lanes(enc.base_nibbles, engine.tail_predicate(count))
    masks = iter(enc.masks)
    lanes = recompose_lanes(nibbles, enc.tracking_bitmap, masks, engine)
    if next(masks, None) is not None:
        raise FormatError("Extension mask overrun: masks left after recomposition")
    return tuple(lanes[:count].tolist())


def interleave_pair(a: EncodedGroup, b: Optional[EncodedGroup], group_size: int) -> bytes:
    """
    Pack the base nibbles of two consecutive groups into g bytes.

    Missing lanes (partial groups, absent second group) encode as 0.
    """
    upper = list(a.base_nibbles) + [0] * (group_size - len(a.base_nibbles))
    lower_src = b.base_nibbles if b is not None else ()
    lower = list(lower_src) + [0] * (group_size - len(lower_src))
    return bytes((hi << 4) | lo for hi, lo in zip(upper, lower))


def deinterleave_pair(
    data: bytes, group_size: int, engine: Optional[VectorEngine] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Split g interleaved bytes into the nibble vectors of both groups.

    Returns:
        (upper nibbles of the first group, lower nibbles of the second group)
    """
    engine = engine or VectorEngine(group_size)
    raw = np.frombuffer(bytes(data), dtype=np.uint8)
    if raw.size != group_size:
        raise FormatError(f"Interleaved nibble block has {raw.size} bytes, expected {group_size}")
    vector = engine.load_i8(raw, 0)
    return engine.shr4(vector), engine.and_0f(vector)


def mask_to_bytes(mask: int, group_size: int) -> bytes:
    return mask.to_bytes(mask_bytes(group_size), "little")


def mask_from_bytes(data: bytes) -> int:
    return int.from_bytes(data, "little")
