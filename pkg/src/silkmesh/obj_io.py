"""Wavefront OBJ reading and writing (triangles only, fan triangulation)."""

from __future__ import annotations

import io
import os

import numpy as np

from .errors import MeshIOError
from .mesh import QuantizedMesh, RawMesh


def parse_obj(text: str) -> tuple[RawMesh, int]:
    """Parse OBJ text; returns the mesh and the count of dropped degenerate faces.

    Only ``v`` and ``f`` records are honored; normals, texcoords and
    materials are ignored.  Polygons are fan-triangulated from their first
    vertex.  Faces with repeated indices are dropped with a warning count.
    """
    vertices: list[tuple[float, float, float]] = []
    faces: list[tuple[int, int, int]] = []
    dropped = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise MeshIOError(f"line {lineno}: vertex needs 3 coordinates")
            try:
                vertices.append((float(parts[1]), float(parts[2]), float(parts[3])))
            except ValueError as exc:
                raise MeshIOError(f"line {lineno}: bad vertex coordinate") from exc
        elif tag == "f":
            if len(parts) < 4:
                raise MeshIOError(f"line {lineno}: face needs >= 3 indices")
            idx: list[int] = []
            for token in parts[1:]:
                ref = token.split("/")[0]
                try:
                    value = int(ref)
                except ValueError as exc:
                    raise MeshIOError(f"line {lineno}: malformed index {token!r}") from exc
                if value < 0:
                    value = len(vertices) + value  # relative indexing
                else:
                    value -= 1
                if value < 0 or value >= len(vertices):
                    raise MeshIOError(f"line {lineno}: index {token!r} out of range")
                idx.append(value)
            for k in range(1, len(idx) - 1):
                tri = (idx[0], idx[k], idx[k + 1])
                if len(set(tri)) < 3:
                    dropped += 1
                else:
                    faces.append(tri)
    if not faces:
        raise MeshIOError("no faces in OBJ input")
    return (
        RawMesh(np.array(vertices, dtype=np.float64), np.array(faces, dtype=np.int64)),
        dropped,
    )


def load_mesh(path: str | os.PathLike) -> RawMesh:
    mesh, _ = load_mesh_with_warnings(path)
    return mesh


def load_mesh_with_warnings(path: str | os.PathLike) -> tuple[RawMesh, int]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise MeshIOError(f"cannot read {path}: {exc}") from exc
    return parse_obj(text)


def format_obj(mesh: RawMesh | QuantizedMesh) -> str:
    out = io.StringIO()
    if isinstance(mesh, QuantizedMesh):
        for x, y, z in mesh.vertices:
            out.write(f"v {int(x)} {int(y)} {int(z)}\n")
    else:
        for x, y, z in mesh.vertices:
            # repr of a Python float round-trips exactly
            out.write(f"v {float(x)!r} {float(y)!r} {float(z)!r}\n")
    for a, b, c in mesh.faces:
        out.write(f"f {int(a) + 1} {int(b) + 1} {int(c) + 1}\n")
    return out.getvalue()


def save_mesh(mesh: RawMesh | QuantizedMesh, path: str | os.PathLike) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(format_obj(mesh))
    except OSError as exc:
        raise MeshIOError(f"cannot write {path}: {exc}") from exc
