"""Geometry evaluation metrics: CD, HD, NC/|NC|, FR and structural quantities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .mesh import QuantizedMesh, RawMesh, undirected_edges


@dataclass(frozen=True)
class SampledSurface:
    points: np.ndarray       # (N, 3)
    normals: np.ndarray      # (N, 3) unit
    source_face: np.ndarray  # (N,)


@dataclass(frozen=True)
class MetricsRecord:
    cd: float
    hd: float
    nc: float
    abs_nc: float
    fr: float

    def to_dict(self) -> dict:
        return {"cd": self.cd, "hd": self.hd, "nc": self.nc, "absNc": self.abs_nc, "fr": self.fr}


def _as_arrays(mesh: RawMesh | QuantizedMesh) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(mesh, QuantizedMesh):
        mesh = mesh.to_raw()
    return mesh.vertices, mesh.faces


def face_areas_and_normals(mesh: RawMesh | QuantizedMesh) -> tuple[np.ndarray, np.ndarray]:
    vertices, faces = _as_arrays(mesh)
    a = vertices[faces[:, 0]]
    b = vertices[faces[:, 1]]
    c = vertices[faces[:, 2]]
    cross = np.cross(b - a, c - a)
    norms = np.linalg.norm(cross, axis=1)
    areas = norms / 2.0
    with np.errstate(invalid="ignore", divide="ignore"):
        normals = np.where(norms[:, None] > 0, cross / norms[:, None], 0.0)
    return areas, normals


def sample_surface(mesh: RawMesh | QuantizedMesh, count: int, seed: int = 42) -> SampledSurface:
    """Area-weighted uniform surface samples with face-winding normals."""
    vertices, faces = _as_arrays(mesh)
    if len(faces) == 0:
        raise ValueError("mesh has no faces")
    areas, normals = face_areas_and_normals(mesh)
    total = areas.sum()
    if total <= 0:
        raise ValueError("mesh has zero surface area")
    rng = np.random.default_rng(seed)
    face_idx = rng.choice(len(faces), size=count, p=areas / total)
    u = rng.random(count)
    v = rng.random(count)
    flip = u + v > 1
    u[flip] = 1 - u[flip]
    v[flip] = 1 - v[flip]
    a = vertices[faces[face_idx, 0]]
    b = vertices[faces[face_idx, 1]]
    c = vertices[faces[face_idx, 2]]
    points = a + u[:, None] * (b - a) + v[:, None] * (c - a)
    return SampledSurface(points, normals[face_idx], face_idx)


def _nn(a: SampledSurface, b: SampledSurface) -> tuple[np.ndarray, np.ndarray]:
    tree = cKDTree(b.points)
    distances, indices = tree.query(a.points, k=1)
    return distances, indices


def chamfer(a: SampledSurface, b: SampledSurface) -> float:
    """Symmetric mean nearest-neighbor Euclidean distance."""
    d_ab, _ = _nn(a, b)
    d_ba, _ = _nn(b, a)
    return float((d_ab.mean() + d_ba.mean()) / 2.0)


def hausdorff(a: SampledSurface, b: SampledSurface) -> float:
    d_ab, _ = _nn(a, b)
    d_ba, _ = _nn(b, a)
    return float(max(d_ab.max(), d_ba.max()))


def normal_consistency(a: SampledSurface, b: SampledSurface) -> tuple[float, float]:
    """Symmetric mean nearest-neighbor normal dot products (signed, absolute)."""
    _, idx_ab = _nn(a, b)
    _, idx_ba = _nn(b, a)
    dots_ab = (a.normals * b.normals[idx_ab]).sum(axis=1)
    dots_ba = (b.normals * a.normals[idx_ba]).sum(axis=1)
    nc = (dots_ab.mean() + dots_ba.mean()) / 2.0
    abs_nc = (np.abs(dots_ab).mean() + np.abs(dots_ba).mean()) / 2.0
    return float(nc), float(abs_nc)


def face_ratio(pred: RawMesh | QuantizedMesh, gt: RawMesh | QuantizedMesh) -> float:
    if gt.face_count == 0:
        raise ValueError("ground-truth mesh has no faces")
    return pred.face_count / gt.face_count


def evaluate(
    pred: RawMesh | QuantizedMesh,
    gt: RawMesh | QuantizedMesh,
    samples: int = 8192,
    seed: int = 42,
) -> MetricsRecord:
    sampled_pred = sample_surface(pred, samples, seed)
    sampled_gt = sample_surface(gt, samples, seed)
    nc, abs_nc = normal_consistency(sampled_pred, sampled_gt)
    return MetricsRecord(
        cd=chamfer(sampled_pred, sampled_gt),
        hd=hausdorff(sampled_pred, sampled_gt),
        nc=nc,
        abs_nc=abs_nc,
        fr=face_ratio(pred, gt),
    )


def average_degree(mesh: RawMesh | QuantizedMesh) -> float:
    """2E/V with E counted as distinct undirected edges."""
    edges = undirected_edges(mesh.faces)
    return 2.0 * len(edges) / mesh.vertex_count


def signed_volume(mesh: RawMesh | QuantizedMesh) -> float:
    vertices, faces = _as_arrays(mesh)
    a = vertices[faces[:, 0]]
    b = vertices[faces[:, 1]]
    c = vertices[faces[:, 2]]
    return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)
