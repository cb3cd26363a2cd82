"""Plain scalar reference of every vector engine operation.

Lanes are Python ints, predicates are lists of bools. These loops are the
ground truth the engine is checked against; they keep no counters.
"""
from typing import List, Optional, Sequence

from errors import EngineFault


def _active(active: Optional[Sequence[bool]], g: int) -> List[bool]:
    return [True] * g if active is None else [bool(a) for a in active]


def _signed(v: int) -> int:
    return v - 256 if v >= 128 else v


def gather_i8(buffer: Sequence[int], base: int, offsets: Sequence[int], active=None) -> List[int]:
    active = _active(active, len(offsets))
    out = []
    for lane, offset in enumerate(offsets):
        if not active[lane]:
            out.append(0)
            continue
        address = base + offset
        if not 0 <= address < len(buffer):
            raise EngineFault(f"Memory fault at {address}")
        out.append(buffer[address] & 0xFF)
    return out


def scatter_i8(buffer: List[int], base: int, offsets: Sequence[int], values: Sequence[int], active=None) -> None:
    active = _active(active, len(offsets))
    seen = set()
    for lane, offset in enumerate(offsets):
        if not active[lane]:
            continue
        address = base + offset
        if not 0 <= address < len(buffer):
            raise EngineFault(f"Memory fault at {address}")
        if address in seen:
            raise EngineFault(f"Duplicate scatter address {address}")
        seen.add(address)
    for lane, offset in enumerate(offsets):
        if active[lane]:
            buffer[base + offset] = _signed(values[lane] & 0xFF)


def masked_or_const(v: Sequence[int], c: int, active=None) -> List[int]:
    active = _active(active, len(v))
    return [(x | c) if active[lane] else x for lane, x in enumerate(v)]


def shr4(v: Sequence[int]) -> List[int]:
    return [x >> 4 for x in v]


def and_0f(v: Sequence[int]) -> List[int]:
    return [x & 0x0F for x in v]


def load_i8(buffer: Sequence[int], start: int, g: int, active=None) -> List[int]:
    active = _active(active, g)
    out = []
    for lane in range(g):
        if not active[lane]:
            out.append(0)
            continue
        address = start + lane
        if not 0 <= address < len(buffer):
            raise EngineFault(f"Memory fault at {address}")
        out.append(buffer[address] & 0xFF)
    return out


def broadcast_lanes(values: Sequence[int], g: int, active=None) -> List[int]:
    active = _active(active, g)
    if len(values) < sum(active):
        raise EngineFault(f"{len(values)} values for {sum(active)} active lanes")
    pending = iter(values)
    out = []
    for lane in range(g):
        if not active[lane]:
            out.append(0)
            continue
        value = next(pending)
        if not -128 <= value <= 255:
            raise EngineFault("Lane value does not fit 8 bits")
        out.append(value & 0xFF)
    return out


def _checked_add(a: Sequence[int], b: Sequence[int], active, op: str) -> List[int]:
    active = _active(active, len(a))
    out = []
    for lane in range(len(a)):
        if not active[lane]:
            out.append(0)
            continue
        value = a[lane] + b[lane]
        if not 0 <= value <= 255:
            raise EngineFault(f"{op}: lane {lane} overflows 8 bits")
        out.append(value)
    return out


def add_lane_const(v: Sequence[int], c: int, active=None) -> List[int]:
    return _checked_add(v, [c] * len(v), active, "add_lane_const")


def add_u8(a: Sequence[int], b: Sequence[int], active=None) -> List[int]:
    return _checked_add(a, b, active, "add_u8")


def add_lane_index_scaled(m: int, g: int, v: Optional[Sequence[int]] = None, active=None) -> List[int]:
    active = _active(active, g)
    out = []
    for lane in range(g):
        if not active[lane]:
            out.append(0)
            continue
        value = lane * m + (v[lane] if v is not None else 0)
        if not 0 <= value <= 255:
            raise EngineFault(f"Lane {lane} overflows 8 bits")
        out.append(value)
    return out


def dot_acc_i32(a: Sequence[int], b: Sequence[int], active=None, acc: int = 0) -> int:
    active = _active(active, len(a))
    for lane in range(len(a)):
        if active[lane]:
            acc += _signed(a[lane] & 0xFF) * _signed(b[lane] & 0xFF)
    if not -(2**31) <= acc <= 2**31 - 1:
        raise EngineFault("Accumulator overflow")
    return acc
