"""Subprocess-backed wrappers around the ``silkmesh`` CLI."""

from __future__ import annotations

import json
import os
import struct
import subprocess
import tempfile
from dataclasses import dataclass

import numpy as np

_EXECUTABLE = os.environ.get("SILKMESH_BIN", "silkmesh")
_MAGIC = b"SILK"


class SilkbindError(RuntimeError):
    """A CLI invocation failed; carries the tool's exit code and stderr."""

    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


def _run(args: list[str], config: str | None = None) -> str:
    env = dict(os.environ)
    cmd = [_EXECUTABLE]
    if config:
        cmd += ["--config", config]
    cmd += args
    proc = subprocess.run(cmd, capture_output=True, text=True, env=env)
    if proc.returncode != 0:
        raise SilkbindError(proc.stderr.strip() or proc.stdout.strip(),
                            proc.returncode)
    return proc.stdout


def _write_obj(path: str, vertices: np.ndarray, faces: np.ndarray) -> None:
    vertices = np.asarray(vertices, dtype=float)
    faces = np.asarray(faces, dtype=int)
    lines = [f"v {float(x)!r} {float(y)!r} {float(z)!r}" for x, y, z in vertices]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in faces]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _read_obj(path: str) -> tuple[np.ndarray, np.ndarray]:
    vertices: list[list[float]] = []
    faces: list[list[int]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                vertices.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                faces.append([int(p.split("/")[0]) - 1 for p in parts[1:4]])
    return (np.array(vertices, dtype=float).reshape(-1, 3),
            np.array(faces, dtype=int).reshape(-1, 3))


def tokens_from_silk(blob: bytes) -> list[int]:
    """Token list from a binary SILK container."""
    if len(blob) < 10 or blob[:4] != _MAGIC:
        raise SilkbindError("not a SILK container", 2)
    (count,) = struct.unpack("<I", blob[6:10])
    return [t[0] for t in struct.iter_unpack("<H", blob[10:10 + 2 * count])]


@dataclass(frozen=True)
class EncodeResult:
    silk: bytes
    tokens: list[int]
    transform: dict


def encode(
    vertices: np.ndarray,
    faces: np.ndarray,
    *,
    repair: bool = True,
    config: str | None = None,
) -> EncodeResult:
    """Tokenize a triangle mesh given as (V, 3) floats and (F, 3) indices."""
    with tempfile.TemporaryDirectory() as tmp:
        obj = os.path.join(tmp, "in.obj")
        silk = os.path.join(tmp, "out.silk")
        tf = os.path.join(tmp, "transform.json")
        _write_obj(obj, vertices, faces)
        args = ["encode", obj, silk, "--transform", tf]
        if not repair:
            args.append("--no-repair")
        _run(args, config)
        with open(silk, "rb") as fh:
            blob = fh.read()
        with open(tf, "r", encoding="utf-8") as fh:
            transform = json.load(fh)
    return EncodeResult(blob, tokens_from_silk(blob), transform)


def decode(
    silk: bytes,
    *,
    salvage: bool = False,
    watertight_repair: bool = False,
    transform: dict | None = None,
    config: str | None = None,
) -> tuple[np.ndarray, np.ndarray, dict]:
    """Rebuild (vertices, faces, report) from a binary token container."""
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "in.silk")
        out = os.path.join(tmp, "out.obj")
        report_path = os.path.join(tmp, "report.json")
        with open(path, "wb") as fh:
            fh.write(silk)
        args = ["decode", path, out, "--report", report_path]
        if salvage:
            args.append("--salvage")
        if watertight_repair:
            args.append("--watertight-repair")
        if transform is not None:
            tf = os.path.join(tmp, "transform.json")
            with open(tf, "w", encoding="utf-8") as fh:
                json.dump(transform, fh)
            args += ["--transform", tf]
        _run(args, config)
        vertices, faces = _read_obj(out)
        with open(report_path, "r", encoding="utf-8") as fh:
            report = json.load(fh)
    return vertices, faces, report


def repair(
    vertices: np.ndarray,
    faces: np.ndarray,
    *,
    config: str | None = None,
) -> tuple[np.ndarray, np.ndarray, dict]:
    """Normalize, quantize and 2-manifold-repair a mesh."""
    with tempfile.TemporaryDirectory() as tmp:
        obj = os.path.join(tmp, "in.obj")
        out = os.path.join(tmp, "out.obj")
        report_path = os.path.join(tmp, "report.json")
        _write_obj(obj, vertices, faces)
        _run(["repair", obj, out, "--report", report_path], config)
        fixed_vertices, fixed_faces = _read_obj(out)
        with open(report_path, "r", encoding="utf-8") as fh:
            report = json.load(fh)
    return fixed_vertices, fixed_faces, report


def metrics(
    pred: tuple[np.ndarray, np.ndarray],
    gt: tuple[np.ndarray, np.ndarray],
    *,
    samples: int = 8192,
    seed: int = 42,
) -> dict:
    """Distance/normal/count metrics between two meshes."""
    with tempfile.TemporaryDirectory() as tmp:
        pred_path = os.path.join(tmp, "pred.obj")
        gt_path = os.path.join(tmp, "gt.obj")
        _write_obj(pred_path, *pred)
        _write_obj(gt_path, *gt)
        out = _run(["metrics", pred_path, gt_path,
                    "--samples", str(samples), "--seed", str(seed)])
    return json.loads(out)


def token_stats(silk: bytes, *, config: str | None = None) -> dict:
    """Sequence statistics for a binary token container."""
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "in.silk")
        with open(path, "wb") as fh:
            fh.write(silk)
        out = _run(["stats", path], config)
    return json.loads(out)


stats = token_stats
