"""Portable model of an embedded SIMD unit with 8-bit lanes and per-lane predication.

Lane vectors are numpy ``uint8`` arrays of length g, predicates are ``bool``
arrays of length g. Arithmetic that treats lanes as signed reinterprets them
with ``view(np.int8)``. Every operation updates the engine's event counters,
which stand in for cycle measurements.
"""
import logging
from dataclasses import dataclass, fields
from typing import Dict, Optional

import numpy as np

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config import DEFAULT_GROUP_SIZE, SUPPORTED_GROUP_SIZES
from errors import EngineFault

logger = logging.getLogger(__name__)

I32_MIN = -(2**31)
I32_MAX = 2**31 - 1


@dataclass
class Counters:
    """Exact event counts of one engine instance."""

    contiguous_loads: int = 0
    gather_loads: int = 0
    scatter_stores: int = 0
    mac_lanes: int = 0
    vector_ops: int = 0
    group_recompositions: int = 0

    def merge(self, other: "Counters") -> "Counters":
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))
        return self

    def snapshot(self) -> Dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


class VectorEngine:
    """Scalar-emulation backend of a g-lane, 8-bit vector unit."""

    def __init__(self, group_size: int = DEFAULT_GROUP_SIZE):
        if group_size not in SUPPORTED_GROUP_SIZES:
            raise ValueError(
                f"Group size must be one of {SUPPORTED_GROUP_SIZES}, got {group_size}"
            )
        self.group_size = group_size
        self.counters = Counters()
        self._lane_index = np.arange(group_size, dtype=np.int64)

    def spawn(self) -> "VectorEngine":
        """A fresh engine with the same configuration and zeroed counters."""
        return VectorEngine(self.group_size)

    # Lane and predicate construction

    def _check_vector(self, v: np.ndarray, name: str = "vector") -> np.ndarray:
        v = np.asarray(v)
        if v.shape != (self.group_size,):
            raise EngineFault(f"{name} has shape {v.shape}, engine has {self.group_size} lanes")
        return v

    def _predicate(self, active: Optional[np.ndarray]) -> np.ndarray:
        if active is None:
            return np.ones(self.group_size, dtype=bool)
        return self._check_vector(active, "predicate").astype(bool)

    def all_active(self) -> np.ndarray:
        return np.ones(self.group_size, dtype=bool)

    def tail_predicate(self, count: int) -> np.ndarray:
        """Predicate with the first ``count`` lanes active."""
        return self._lane_index < count

    def mask_predicate(self, mask: int) -> np.ndarray:
        """Predicate from a lane bitmask, lane i taken from bit i."""
        return ((mask >> self._lane_index) & 1).astype(bool)

    def broadcast_lanes(self, values, active: Optional[np.ndarray] = None) -> np.ndarray:
        """Move up to g scalar byte values into a vector, inactive lanes zero."""
        active = self._predicate(active)
        values = np.asarray(values, dtype=np.int64)
        out = np.zeros(self.group_size, dtype=np.uint8)
        count = int(active.sum())
        if values.size < count:
            raise EngineFault(f"{values.size} values for {count} active lanes")
        if np.any((values[:count] < -128) | (values[:count] > 255)):
            raise EngineFault("Lane value does not fit 8 bits")
        out[active] = (values[:count] & 0xFF).astype(np.uint8)
        self.counters.vector_ops += 1
        return out

    # Memory access

    def _addresses(self, buffer_len: int, base: int, offsets: np.ndarray, active: np.ndarray):
        offsets = self._check_vector(offsets, "offsets").astype(np.int64)
        addresses = base + offsets[active]
        if addresses.size and (addresses.min() < 0 or addresses.max() >= buffer_len):
            bad = addresses[(addresses < 0) | (addresses >= buffer_len)][0]
            raise EngineFault(f"Memory fault: address {bad} outside buffer of {buffer_len}")
        return addresses

    def load_i8(self, buffer: np.ndarray, start: int, active: Optional[np.ndarray] = None) -> np.ndarray:
        """Contiguous predicated load of g bytes starting at ``start``."""
        active = self._predicate(active)
        addresses = self._addresses(len(buffer), start, self._lane_index, active)
        out = np.zeros(self.group_size, dtype=np.uint8)
        if addresses.size:
            out[active] = np.asarray(buffer)[addresses].view(np.uint8)
        self.counters.contiguous_loads += 1
        return out

    def gather_i8(
        self, buffer: np.ndarray, base: int, offsets: np.ndarray, active: Optional[np.ndarray] = None
    ) -> np.ndarray:
        """
        Gather bytes from ``buffer[base + offsets[l]]`` into active lanes.

        Args:
            buffer: 1-D int8 or uint8 array
            base: Scalar base pointer, may be negative
            offsets: Unsigned 8-bit lane offsets
            active: Lanes to load; inactive lanes read nothing and return 0

        Returns:
            Loaded lanes as uint8

        Raises:
            EngineFault: An active lane addresses memory outside the buffer
        """
        active = self._predicate(active)
        addresses = self._addresses(len(buffer), base, offsets, active)
        out = np.zeros(self.group_size, dtype=np.uint8)
        if addresses.size:
            out[active] = np.asarray(buffer)[addresses].view(np.uint8)
        self.counters.gather_loads += 1
        return out

    def scatter_i8(
        self,
        buffer: np.ndarray,
        base: int,
        offsets: np.ndarray,
        values: np.ndarray,
        active: Optional[np.ndarray] = None,
    ) -> None:
        """
        Scatter active lanes of ``values`` to ``buffer[base + offsets[l]]``.

        Raises:
            EngineFault: Out-of-bounds address or duplicate active offsets
        """
        active = self._predicate(active)
        values = self._check_vector(values, "values")
        addresses = self._addresses(len(buffer), base, offsets, active)
        if np.unique(addresses).size != addresses.size:
            raise EngineFault("Scatter with duplicate offsets among active lanes")
        if addresses.size:
            buffer.view(np.uint8)[addresses] = values.astype(np.uint8)[active]
        self.counters.scatter_stores += 1

    # Lane arithmetic

    def masked_or_const(self, v: np.ndarray, c: int, active: Optional[np.ndarray] = None) -> np.ndarray:
        """Bitwise-or of constant ``c`` into the active lanes of ``v``."""
        if not 0 <= c <= 0xFF:
            raise EngineFault(f"Constant {c} does not fit 8 bits")
        active = self._predicate(active)
        v = self._check_vector(v).astype(np.uint8)
        out = np.where(active, v | np.uint8(c), v).astype(np.uint8)
        self.counters.vector_ops += 1
        return out

    def shr4(self, v: np.ndarray) -> np.ndarray:
        out = self._check_vector(v).astype(np.uint8) >> 4
        self.counters.vector_ops += 1
        return out.astype(np.uint8)

    def and_0f(self, v: np.ndarray) -> np.ndarray:
        out = self._check_vector(v).astype(np.uint8) & 0x0F
        self.counters.vector_ops += 1
        return out.astype(np.uint8)

    def _checked_u8(self, wide: np.ndarray, active: np.ndarray, op: str) -> np.ndarray:
        if np.any(active & ((wide < 0) | (wide > 0xFF))):
            raise EngineFault(f"{op}: lane overflows 8 bits")
        self.counters.vector_ops += 1
        return np.where(active, wide, 0).astype(np.uint8)

    def add_lane_const(self, v: np.ndarray, c: int, active: Optional[np.ndarray] = None) -> np.ndarray:
        active = self._predicate(active)
        wide = self._check_vector(v).astype(np.int64) + c
        return self._checked_u8(wide, active, "add_lane_const")

    def add_u8(self, a: np.ndarray, b: np.ndarray, active: Optional[np.ndarray] = None) -> np.ndarray:
        active = self._predicate(active)
        wide = self._check_vector(a).astype(np.int64) + self._check_vector(b).astype(np.int64)
        return self._checked_u8(wide, active, "add_u8")

    def add_lane_index_scaled(
        self, m: int, v: Optional[np.ndarray] = None, active: Optional[np.ndarray] = None
    ) -> np.ndarray:
        """Lane l becomes ``l * m`` (plus ``v[l]`` when given); inactive lanes are 0."""
        active = self._predicate(active)
        wide = self._lane_index * m
        if v is not None:
            wide = wide + self._check_vector(v).astype(np.int64)
        return self._checked_u8(wide, active, "add_lane_index_scaled")

    def dot_acc_i32(
        self, a: np.ndarray, b: np.ndarray, active: Optional[np.ndarray] = None, acc: int = 0
    ) -> int:
        """
        Widening signed dot product of the active lanes, accumulated into ``acc``.

        Raises:
            EngineFault: The result leaves the signed 32-bit range
        """
        active = self._predicate(active)
        a = self._check_vector(a).astype(np.uint8).view(np.int8).astype(np.int64)
        b = self._check_vector(b).astype(np.uint8).view(np.int8).astype(np.int64)
        result = int(acc) + int(np.dot(a[active], b[active]))
        if not I32_MIN <= result <= I32_MAX:
            raise EngineFault(f"Accumulator overflow: {result} outside signed 32-bit range")
        self.counters.mac_lanes += int(active.sum())
        self.counters.vector_ops += 1
        return result
