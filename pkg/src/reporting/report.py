"""Benchmark and footprint reports with JSON and CSV output."""
import csv
import io
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from config import REPORT_FORMATS, TOOL_VERSION
from encoders.footprint import FootprintBreakdown

logger = logging.getLogger(__name__)


@dataclass
class KernelResult:
    """Counters and wall-clock durations of one benchmarked kernel."""

    kernel: str
    pixels: int
    counters: Dict[str, int]
    durations_s: List[float] = field(default_factory=list)
    oracle: str = "ok"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pixels": self.pixels,
            "oracle": self.oracle,
            "counters": dict(self.counters),
            "durations_s": [round(d, 6) for d in self.durations_s],
        }


@dataclass
class SweepPoint:
    """Footprints of one generated matrix in a sparsity sweep."""

    sparsity: float
    nnz: int
    footprints: List[FootprintBreakdown] = field(default_factory=list)
    skipped: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sparsity": self.sparsity,
            "nnz": self.nnz,
            "footprints": {fp.format: fp.to_dict() for fp in self.footprints},
            "skipped": dict(self.skipped),
        }


@dataclass
class Report:
    """
    Everything one CLI invocation measured.

    ``input`` describes where the matrix came from (file path or generator
    parameters) plus its shape and non-zero count.
    """

    command: str
    input: Dict[str, Any]
    footprints: List[FootprintBreakdown] = field(default_factory=list)
    kernels: List[KernelResult] = field(default_factory=list)
    skipped: Dict[str, str] = field(default_factory=dict)
    sweep: List[SweepPoint] = field(default_factory=list)
    tool_version: str = TOOL_VERSION
    generated_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tool_version": self.tool_version,
            "generated_at": self.generated_at,
            "command": self.command,
            "input": dict(self.input),
            "footprints": {fp.format: fp.to_dict() for fp in self.footprints},
            "kernels": {k.kernel: k.to_dict() for k in self.kernels},
            "skipped": dict(self.skipped),
            "sweep": [point.to_dict() for point in self.sweep],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        """Flattened ``key,value`` projection of the JSON document."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["key", "value"])
        for key, value in flatten_report(self.to_dict()).items():
            writer.writerow([key, value])
        return buffer.getvalue()

    def render(self, fmt: str) -> str:
        if fmt not in REPORT_FORMATS:
            raise ValueError(f"Unknown report format {fmt!r}, expected one of {REPORT_FORMATS}")
        return self.to_json() if fmt == "json" else self.to_csv()


def flatten_report(document: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    """Dotted-key view of a nested report; list items are keyed by position."""
    flat = {}
    items = enumerate(document) if isinstance(document, list) else document.items()
    for key, value in items:
        name = f"{prefix}{key}"
        if isinstance(value, (dict, list)):
            flat.update(flatten_report(value, f"{name}."))
        else:
            flat[name] = "" if value is None else value
    return flat


def write_report(report: Report, fmt: str, path: Optional[Union[str, Path]] = None) -> None:
    """Write a rendered report to ``path``, or to stdout when no path is given."""
    text = report.render(fmt)
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    Path(path).write_text(text)
    logger.info(f"Wrote {fmt} report to {path}")
