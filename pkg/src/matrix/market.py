"""Matrix Market (coordinate, integer, general) reader and writer."""
import logging
from pathlib import Path
from typing import Union

import numpy as np

from errors import FormatError
from matrix.dense import DenseMatrixI8, I8_MAX, I8_MIN

logger = logging.getLogger(__name__)

MARKET_HEADER = "%%MatrixMarket matrix coordinate integer general"


def store_matrix_market(m: DenseMatrixI8, path: Union[str, Path]) -> int:
    """
    Write the non-zero entries of a matrix as 1-based coordinate triples.

    Args:
        m: Matrix to write
        path: Destination file

    Returns:
        Number of entries written
    """
    rows, cols = np.nonzero(m.data)
    values = m.data[rows, cols]

    lines = [MARKET_HEADER, f"{m.rows} {m.cols} {rows.size}"]
    lines.extend(
        f"{r + 1} {c + 1} {v}" for r, c, v in zip(rows.tolist(), cols.tolist(), values.tolist())
    )
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")

    logger.info(f"Wrote {rows.size} entries of a {m.rows}x{m.cols} matrix to {path}")
    return int(rows.size)


def _parse_ints(line: str, count: int, line_no: int) -> list:
    fields = line.split()
    if len(fields) != count:
        raise FormatError(f"Line {line_no}: expected {count} fields, got {len(fields)}")
    try:
        return [int(f) for f in fields]
    except ValueError:
        raise FormatError(f"Line {line_no}: non-integer field in {line.strip()!r}")


def load_matrix_market(path: Union[str, Path]) -> DenseMatrixI8:
    """
    Read a coordinate/integer/general Matrix Market file.

    Args:
        path: Source file

    Returns:
        Dense matrix with every listed entry placed, zeros elsewhere

    Raises:
        FormatError: Malformed header or size line, index out of range,
            duplicate coordinates, value outside [-128, 127], wrong entry count
    """
    text = Path(path).read_text(encoding="ascii", errors="replace")
    lines = text.splitlines()
    if not lines:
        raise FormatError(f"{path}: empty file")

    header = lines[0].split()
    if (
        len(header) != 5
        or header[0] != "%%MatrixMarket"
        or [h.lower() for h in header[1:]] != ["matrix", "coordinate", "integer", "general"]
    ):
        raise FormatError(f"{path}: unsupported header {lines[0]!r}")

    body = [
        (line_no, line)
        for line_no, line in enumerate(lines[1:], start=2)
        if line.strip() and not line.lstrip().startswith("%")
    ]
    if not body:
        raise FormatError(f"{path}: missing size line")

    size_line_no, size_line = body[0]
    rows, cols, entries = _parse_ints(size_line, 3, size_line_no)
    if rows < 1 or cols < 1 or entries < 0:
        raise FormatError(f"{path}: invalid size line {size_line!r}")
    if len(body) - 1 != entries:
        raise FormatError(f"{path}: size line announces {entries} entries, found {len(body) - 1}")

    data = np.zeros((rows, cols), dtype=np.int8)
    seen = set()
    for line_no, line in body[1:]:
        r, c, v = _parse_ints(line, 3, line_no)
        if not (1 <= r <= rows and 1 <= c <= cols):
            raise FormatError(f"{path}:{line_no}: index ({r}, {c}) outside {rows}x{cols}")
        if (r, c) in seen:
            raise FormatError(f"{path}:{line_no}: duplicate entry ({r}, {c})")
        seen.add((r, c))
        if not I8_MIN <= v <= I8_MAX:
            raise FormatError(f"{path}:{line_no}: value {v} outside [-128, 127]")
        data[r - 1, c - 1] = v

    logger.info(f"Loaded {rows}x{cols} matrix with {entries} entries from {path}")
    return DenseMatrixI8(rows, cols, data)
