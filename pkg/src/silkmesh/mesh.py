"""Mesh data model: raw/quantized meshes, normalization and quantization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MeshIOError, ZeroExtentError


@dataclass(frozen=True)
class Transform:
    """Records ``x_norm = (x - center) / scale + 0.5`` for inverse mapping."""

    scale: float
    center: tuple[float, float, float]

    def apply(self, coords: np.ndarray) -> np.ndarray:
        return (coords - np.asarray(self.center)) / self.scale + 0.5

    def invert(self, coords: np.ndarray) -> np.ndarray:
        return (coords - 0.5) * self.scale + np.asarray(self.center)


IDENTITY_TRANSFORM = Transform(scale=1.0, center=(0.5, 0.5, 0.5))


def _check_faces(vertex_count: int, faces: np.ndarray) -> None:
    if faces.size:
        if faces.min() < 0 or faces.max() >= vertex_count:
            raise MeshIOError("face index out of range")
        a, b, c = faces[:, 0], faces[:, 1], faces[:, 2]
        if np.any((a == b) | (b == c) | (a == c)):
            raise MeshIOError("face with repeated vertex index")


@dataclass(frozen=True)
class RawMesh:
    """Float-coordinate triangle mesh."""

    vertices: np.ndarray  # (V, 3) float64
    faces: np.ndarray     # (F, 3) int64
    transform: Transform = IDENTITY_TRANSFORM

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3))
        f = np.ascontiguousarray(np.asarray(self.faces, dtype=np.int64).reshape(-1, 3))
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)
        _check_faces(len(v), f)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def face_count(self) -> int:
        return len(self.faces)


@dataclass(frozen=True)
class QuantizedMesh:
    """Integer-grid triangle mesh in ``[0, resolution)^3``."""

    vertices: np.ndarray  # (V, 3) int64
    faces: np.ndarray     # (F, 3) int64
    resolution: int = 128
    transform: Transform = IDENTITY_TRANSFORM
    merged_vertices: int = 0
    removed_faces: int = 0

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.int64).reshape(-1, 3))
        f = np.ascontiguousarray(np.asarray(self.faces, dtype=np.int64).reshape(-1, 3))
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)
        if v.size and (v.min() < 0 or v.max() >= self.resolution):
            raise MeshIOError("quantized coordinate out of range")
        _check_faces(len(v), f)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def face_count(self) -> int:
        return len(self.faces)

    def to_raw(self, denormalize: bool = False) -> RawMesh:
        """Map grid cells back to coordinates (cell centers)."""
        coords = (self.vertices.astype(np.float64) + 0.5) / self.resolution
        if denormalize:
            coords = self.transform.invert(coords)
        return RawMesh(coords, self.faces.copy(), transform=self.transform)


def normalize(mesh: RawMesh) -> RawMesh:
    """Scale/translate into the unit cube: bbox centered at 0.5, longest extent 1."""
    if mesh.vertex_count == 0:
        raise ZeroExtentError("mesh has no vertices")
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    extent = float((hi - lo).max())
    if extent <= 0.0:
        raise ZeroExtentError("all vertices coincide")
    center = (lo + hi) / 2.0
    transform = Transform(scale=extent, center=tuple(float(x) for x in center))
    return RawMesh(transform.apply(mesh.vertices), mesh.faces.copy(), transform=transform)


def quantize(mesh: RawMesh, resolution: int = 128) -> QuantizedMesh:
    """Snap normalized coordinates to the integer grid, merging coincident vertices.

    ``q = floor(c * resolution)`` with the upper boundary clamped to
    ``resolution - 1``.  Faces that collapse after the merge are removed.
    Vertices left unreferenced by any face are dropped.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    grid = np.floor(mesh.vertices * resolution).astype(np.int64)
    np.clip(grid, 0, resolution - 1, out=grid)

    # merge identical grid cells, keeping first-occurrence order
    _, first_idx, inverse = np.unique(
        grid, axis=0, return_index=True, return_inverse=True
    )
    order = np.argsort(first_idx)
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    remap = rank[inverse]
    merged = len(grid) - len(first_idx)
    new_vertices = grid[np.sort(first_idx)]

    faces = remap[mesh.faces] if mesh.faces.size else mesh.faces.copy()
    if faces.size:
        a, b, c = faces[:, 0], faces[:, 1], faces[:, 2]
        keep = (a != b) & (b != c) & (a != c)
        removed = int((~keep).sum())
        faces = faces[keep]
    else:
        removed = 0

    # drop vertices no face references
    if faces.size:
        used = np.zeros(len(new_vertices), dtype=bool)
        used[faces.ravel()] = True
    else:
        used = np.zeros(len(new_vertices), dtype=bool)
    if not used.all():
        new_index = np.cumsum(used) - 1
        new_vertices = new_vertices[used]
        if faces.size:
            faces = new_index[faces]

    return QuantizedMesh(
        new_vertices,
        faces,
        resolution=resolution,
        transform=mesh.transform,
        merged_vertices=merged,
        removed_faces=removed,
    )


@dataclass(frozen=True)
class ComponentLabels:
    component_of: np.ndarray  # (V,) int64
    component_count: int


def connected_components(mesh: QuantizedMesh) -> ComponentLabels:
    """Label vertices by face-edge connectivity, lowest-vertex component first."""
    n = mesh.vertex_count
    parent = np.arange(n, dtype=np.int64)

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(x: int, y: int) -> None:
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)

    for a, b, c in mesh.faces:
        union(int(a), int(b))
        union(int(a), int(c))
    labels = np.empty(n, dtype=np.int64)
    next_label = 0
    seen: dict[int, int] = {}
    for v in range(n):
        r = find(v)
        if r not in seen:
            seen[r] = next_label
            next_label += 1
        labels[v] = seen[r]
    return ComponentLabels(labels, next_label)


def undirected_edges(faces: np.ndarray) -> set[tuple[int, int]]:
    edges: set[tuple[int, int]] = set()
    for a, b, c in faces:
        a, b, c = int(a), int(b), int(c)
        edges.add((a, b) if a < b else (b, a))
        edges.add((b, c) if b < c else (c, b))
        edges.add((a, c) if a < c else (c, a))
    return edges


def euler_characteristic(mesh: QuantizedMesh | RawMesh) -> int:
    """V - E + F with E counted as distinct undirected edges."""
    return mesh.vertex_count - len(undirected_edges(mesh.faces)) + mesh.face_count
