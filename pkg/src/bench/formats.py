"""Registry tying each format name to its encoder, decoder, serializer and accounting."""
import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, Tuple

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config import (
    BCSR_MAGIC, CSR_MAGIC, DCSR_MAGIC, DEFAULT_GROUP_SIZE, DEFAULT_RI_BITS, FORMATS, RI_MAGIC
)
from encoders import bcsr, csr, dcsr, relative_indexing
from encoders.footprint import FootprintBreakdown
from errors import FormatError
from matrix.dense import DenseMatrixI8

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FormatCodec:
    name: str
    magic: bytes
    encode: Callable[..., Any]
    decode: Callable[[Any], DenseMatrixI8]
    serialize: Callable[[Any], bytes]
    deserialize: Callable[[bytes], Any]
    footprint: Callable[[Any], FootprintBreakdown]


CODECS: Dict[str, FormatCodec] = {
    "dcsr": FormatCodec(
        "dcsr", DCSR_MAGIC, dcsr.encode_matrix, dcsr.decode_matrix,
        dcsr.serialize, dcsr.deserialize, dcsr.footprint,
    ),
    "csr": FormatCodec(
        "csr", CSR_MAGIC, csr.encode_csr, csr.decode_csr,
        csr.serialize_csr, csr.deserialize_csr, csr.footprint_csr,
    ),
    "bcsr": FormatCodec(
        "bcsr", BCSR_MAGIC, bcsr.encode_bcsr, bcsr.decode_bcsr,
        bcsr.serialize_bcsr, bcsr.deserialize_bcsr, bcsr.footprint_bcsr,
    ),
    "ri": FormatCodec(
        "ri", RI_MAGIC, relative_indexing.encode_ri, relative_indexing.decode_ri,
        relative_indexing.serialize_ri, relative_indexing.deserialize_ri,
        relative_indexing.footprint_ri,
    ),
}


def encode_as(
    m: DenseMatrixI8,
    fmt: str,
    group_size: int = DEFAULT_GROUP_SIZE,
    ri_bits: int = DEFAULT_RI_BITS,
) -> Any:
    """Encode ``m`` in the named format, passing the format's own parameter."""
    if fmt not in CODECS:
        raise ValueError(f"Unknown format {fmt!r}, expected one of {FORMATS}")
    if fmt == "dcsr":
        return dcsr.encode_matrix(m, group_size)
    if fmt == "ri":
        return relative_indexing.encode_ri(m, ri_bits)
    return CODECS[fmt].encode(m)


def detect_format(blob: bytes) -> str:
    """
    Raises:
        FormatError: The blob starts with no known container magic
    """
    for codec in CODECS.values():
        if blob[:len(codec.magic)] == codec.magic:
            return codec.name
    raise FormatError(f"Unknown container magic {bytes(blob[:4])!r}")


def load_encoded(path) -> Tuple[str, Any]:
    """Read an encoded file and return its format name and decoded container."""
    blob = Path(path).read_bytes()
    fmt = detect_format(blob)
    encoded = CODECS[fmt].deserialize(blob)
    logger.info(f"Loaded {fmt} container from {path} ({len(blob)} bytes)")
    return fmt, encoded
