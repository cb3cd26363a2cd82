"""Sectioned little-endian container plumbing shared by every serialized format.

A container is a fixed header followed by typed sections, each padded with
zero bytes to the section alignment. An optional CRC32 trailer covers all
preceding bytes.
"""
import logging
import struct
import zlib
from typing import List

import numpy as np

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config import SECTION_ALIGNMENT
from errors import FormatError

logger = logging.getLogger(__name__)

_CRC = struct.Struct("<I")


def _fill(length: int) -> int:
    return -length % SECTION_ALIGNMENT


class SectionWriter:
    """Accumulates a header and aligned sections into one byte string."""

    def __init__(self, header: bytes):
        if len(header) % SECTION_ALIGNMENT:
            raise ValueError("Container headers must be a multiple of the section alignment")
        self._parts: List[bytes] = [header]
        self.core_bytes = 0
        self.overhead_bytes = len(header)

    def add(self, array: np.ndarray, dtype: str) -> None:
        data = np.ascontiguousarray(array, dtype=np.dtype(dtype).newbyteorder("<")).tobytes()
        fill = _fill(len(data))
        self._parts.append(data + b"\x00" * fill)
        self.core_bytes += len(data)
        self.overhead_bytes += fill

    def finish(self, with_crc: bool = False) -> bytes:
        blob = b"".join(self._parts)
        if with_crc:
            blob += _CRC.pack(zlib.crc32(blob))
            self.overhead_bytes += _CRC.size
        return blob


class SectionReader:
    """Reads back what SectionWriter produced, checking bounds and fill."""

    def __init__(self, blob: bytes, header: struct.Struct, magic: bytes):
        if len(blob) < header.size:
            raise FormatError(f"Container truncated: {len(blob)} bytes, header needs {header.size}")
        if blob[:len(magic)] != magic:
            raise FormatError(f"Bad magic {bytes(blob[:len(magic)])!r}, expected {magic!r}")
        self.blob = blob
        self.header = header.unpack_from(blob)
        self.offset = header.size
        self.end = len(blob)

    def verify_crc(self) -> None:
        if self.end - self.offset < _CRC.size:
            raise FormatError("Container truncated: CRC trailer missing")
        self.end -= _CRC.size
        (stored,) = _CRC.unpack_from(self.blob, self.end)
        actual = zlib.crc32(self.blob[:self.end])
        if stored != actual:
            raise FormatError(f"CRC mismatch: stored {stored:#010x}, computed {actual:#010x}")

    def read(self, count: int, dtype: str, name: str) -> np.ndarray:
        dt = np.dtype(dtype).newbyteorder("<")
        length = count * dt.itemsize
        fill = _fill(length)
        if self.offset + length + fill > self.end:
            raise FormatError(
                f"Section {name} overruns the container: needs {length + fill} bytes "
                f"at offset {self.offset}, container ends at {self.end}"
            )
        if count == 0:
            return np.empty(0, dtype=dt.newbyteorder("="))
        data = np.frombuffer(self.blob, dtype=dt, count=count, offset=self.offset)
        padding = self.blob[self.offset + length:self.offset + length + fill]
        if any(padding):
            raise FormatError(f"Section {name} has non-zero alignment fill")
        self.offset += length + fill
        return data.astype(dt.newbyteorder("="))

    def finish(self) -> None:
        if self.offset != self.end:
            raise FormatError(f"Container has {self.end - self.offset} unexpected trailing bytes")
