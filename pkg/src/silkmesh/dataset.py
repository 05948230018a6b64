"""Corpus preparation: filtering, balanced sampling schedules, augmentation."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass

import numpy as np

from .config import CodecConfig
from .errors import EncodingCapacityExceeded, SilkmeshError
from .layering import layer_component
from .halfedge import build_half_edge
from .mesh import RawMesh, connected_components
from .metrics import sample_surface
from .obj_io import load_mesh
from .pipeline import preprocess
from .tokens import encode_mesh


@dataclass(frozen=True)
class CorpusEntry:
    path: str
    category: str
    accepted: bool
    reason: str | None = None
    tokens: int | None = None
    faces: int | None = None
    vertices: int | None = None
    max_layer_width: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _max_layer_width(mesh, config: CodecConfig) -> int:
    he = build_half_edge(mesh)
    labels = connected_components(mesh)
    widest = 0
    groups: dict[int, set[int]] = {}
    for v in range(mesh.vertex_count):
        groups.setdefault(int(labels.component_of[v]), set()).add(v)
    for vertices in groups.values():
        if not any(v in he.out_edges for v in vertices):
            continue
        labeling = layer_component(he, vertices, config)
        widest = max(widest, max(len(layer) for layer in labeling.layers))
    return widest


def prepare_entry(
    path: str, category: str = "", config: CodecConfig | None = None
) -> CorpusEntry:
    """Preprocess and tokenize one mesh, applying the corpus admission rules.

    An entry is rejected when the token sequence exceeds ``max_tokens`` or
    any vertex layer is wider than ``max_layer_width``.
    """
    config = config or CodecConfig()
    try:
        mesh = preprocess(load_mesh(path), config).mesh
        width = _max_layer_width(mesh, config)
        if width > config.max_layer_width:
            return CorpusEntry(
                path, category, False,
                reason=f"layer width {width} > {config.max_layer_width}",
                faces=mesh.face_count, vertices=mesh.vertex_count,
                max_layer_width=width,
            )
        tokens = encode_mesh(mesh, config)
    except EncodingCapacityExceeded as exc:
        return CorpusEntry(path, category, False, reason=str(exc))
    except SilkmeshError as exc:
        return CorpusEntry(path, category, False, reason=str(exc))
    if len(tokens) > config.max_tokens:
        return CorpusEntry(
            path, category, False,
            reason=f"{len(tokens)} tokens > {config.max_tokens}",
            tokens=len(tokens), faces=mesh.face_count,
            vertices=mesh.vertex_count, max_layer_width=width,
        )
    return CorpusEntry(
        path, category, True,
        tokens=len(tokens), faces=mesh.face_count,
        vertices=mesh.vertex_count, max_layer_width=width,
    )


def write_manifest(entries: list[CorpusEntry], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(json.dumps(entry.to_dict()) + "\n")


def read_manifest(path: str) -> list[CorpusEntry]:
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                entries.append(CorpusEntry(**json.loads(line)))
    return entries


def instance_balanced(counts: dict[str, int]) -> dict[str, float]:
    total = sum(counts.values())
    if total <= 0:
        raise ValueError("empty corpus")
    return {c: n / total for c, n in counts.items()}


def class_balanced(counts: dict[str, int]) -> dict[str, float]:
    if not counts:
        raise ValueError("empty corpus")
    return {c: 1.0 / len(counts) for c in counts}


def sampling_probability(
    counts: dict[str, int], epoch: int, total_epochs: int
) -> dict[str, float]:
    """Per-category draw probability, shifting linearly from instance- to
    class-balanced over the training run."""
    if not (0 <= epoch <= total_epochs):
        raise ValueError("epoch must lie in [0, total_epochs]")
    ib = instance_balanced(counts)
    cb = class_balanced(counts)
    t = epoch / total_epochs
    return {c: (1.0 - t) * ib[c] + t * cb[c] for c in counts}


def sampling_schedule(
    counts: dict[str, int], total_epochs: int
) -> list[dict[str, float]]:
    return [
        sampling_probability(counts, epoch, total_epochs)
        for epoch in range(total_epochs + 1)
    ]


def write_schedule(
    counts: dict[str, int], total_epochs: int, path: str
) -> None:
    categories = sorted(counts)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch"] + categories)
        for epoch, row in enumerate(sampling_schedule(counts, total_epochs)):
            writer.writerow([epoch] + [f"{row[c]:.10f}" for c in categories])


def augment_mesh(mesh: RawMesh, rng: np.random.Generator) -> RawMesh:
    """Random per-axis scaling in [0.75, 0.95] and a y-axis rotation by a
    multiple of 30 degrees."""
    scales = rng.uniform(0.75, 0.95, size=3)
    angle = np.deg2rad(30.0 * rng.integers(0, 12))
    cos, sin = np.cos(angle), np.sin(angle)
    rotation = np.array([[cos, 0.0, sin], [0.0, 1.0, 0.0], [-sin, 0.0, cos]])
    vertices = (mesh.vertices * scales) @ rotation.T
    return RawMesh(vertices, mesh.faces.copy())


def sample_point_cloud(
    mesh: RawMesh,
    rng: np.random.Generator,
    count: int = 4096,
    noise_sigma: float = 0.005,
    noise_probability: float = 0.5,
) -> np.ndarray:
    """Area-weighted surface point cloud, optionally jittered with Gaussian
    noise (applied to the whole cloud with the given probability)."""
    sampled = sample_surface(mesh, count, seed=int(rng.integers(0, 2**31)))
    points = sampled.points
    if rng.random() < noise_probability:
        points = points + rng.normal(0.0, noise_sigma, size=points.shape)
    return points
