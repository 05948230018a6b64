"""High-level preprocessing and whole-mesh codec entry points."""

from __future__ import annotations

from dataclasses import dataclass

from .config import CodecConfig
from .mesh import QuantizedMesh, RawMesh, normalize, quantize
from .repair import RepairLog, repair_non_manifold


@dataclass(frozen=True)
class PreprocessResult:
    mesh: QuantizedMesh
    repair_log: RepairLog
    merged_vertices: int
    removed_faces: int


def preprocess(mesh: RawMesh, config: CodecConfig | None = None) -> PreprocessResult:
    """normalize -> quantize -> repair; the codec's canonical input form."""
    config = config or CodecConfig()
    quantized = quantize(normalize(mesh), config.resolution)
    repaired, log = repair_non_manifold(quantized)
    return PreprocessResult(
        mesh=repaired,
        repair_log=log,
        merged_vertices=quantized.merged_vertices,
        removed_faces=quantized.removed_faces,
    )
