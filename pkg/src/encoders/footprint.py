"""Per-format memory footprint accounting."""
from dataclasses import dataclass, field
from typing import Dict


@dataclass(frozen=True)
class FootprintBreakdown:
    """
    Byte accounting of one encoded matrix.

    ``components`` splits ``metadata_bytes`` by stream; container headers and
    alignment fill are reported in ``container_overhead_bytes`` and are not
    part of ``total_bytes``.
    """

    format: str
    rows: int
    cols: int
    values_bytes: int
    padding_bytes: int
    metadata_bytes: int
    components: Dict[str, int] = field(default_factory=dict)
    container_overhead_bytes: int = 0

    def __post_init__(self):
        if self.components and sum(self.components.values()) != self.metadata_bytes:
            raise ValueError("Metadata components do not add up to metadata_bytes")

    @property
    def total_bytes(self) -> int:
        return self.values_bytes + self.padding_bytes + self.metadata_bytes

    @property
    def dense_bytes(self) -> int:
        return self.rows * self.cols

    @property
    def compression_ratio(self) -> float:
        return self.dense_bytes / self.total_bytes if self.total_bytes else float("inf")

    def to_dict(self) -> Dict:
        return {
            "format": self.format,
            "values_bytes": self.values_bytes,
            "padding_bytes": self.padding_bytes,
            "metadata_bytes": self.metadata_bytes,
            "total_bytes": self.total_bytes,
            "dense_bytes": self.dense_bytes,
            "compression_ratio": round(self.compression_ratio, 6),
            "container_overhead_bytes": self.container_overhead_bytes,
            "components": dict(self.components),
        }
