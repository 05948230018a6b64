"""HTTP service exposing the codec; the CLI is a thin client of this app."""

from __future__ import annotations

import base64
import binascii

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import dataset, metrics as metrics_mod
from .config import CodecConfig, Vocabulary, validate_config_dict
from .errors import MeshIOError, SilkmeshError
from .halfedge import validate_manifold
from .mesh import Transform, euler_characteristic, normalize, quantize
from .obj_io import format_obj, parse_obj
from .pipeline import preprocess
from .repair import repair_non_manifold
from .tokens import (
    decode_tokens,
    encode_mesh,
    sequence_stats,
    tokens_from_bytes,
    tokens_to_bytes,
)
from .watertight import detect_holes, repair_holes

app = FastAPI(title="silkmesh", version="0.1.0")


@app.exception_handler(SilkmeshError)
async def _silkmesh_error(_request: Request, exc: SilkmeshError) -> JSONResponse:
    return JSONResponse(status_code=422, content={"error": str(exc), "kind": exc.kind})


@app.exception_handler(ValueError)
async def _value_error(_request: Request, exc: ValueError) -> JSONResponse:
    return JSONResponse(status_code=422, content={"error": str(exc), "kind": "validation"})


def _config_from(values: dict | None) -> CodecConfig:
    if not values:
        return CodecConfig()
    return validate_config_dict(values)


def _tokens_from_request(req) -> list[int]:
    if req.tokens is not None:
        return list(req.tokens)
    if req.silk is not None:
        try:
            blob = base64.b64decode(req.silk, validate=True)
        except (binascii.Error, ValueError) as exc:
            raise MeshIOError(f"invalid base64 token payload: {exc}") from exc
        return tokens_from_bytes(blob)
    raise MeshIOError("request carries neither tokens nor a silk payload")


class RepairRequest(BaseModel):
    obj: str
    config: dict | None = None


class EncodeRequest(BaseModel):
    obj: str
    config: dict | None = None
    repair: bool = True


class DecodeRequest(BaseModel):
    tokens: list[int] | None = None
    silk: str | None = Field(default=None, description="base64 binary token stream")
    config: dict | None = None
    salvage: bool = False
    watertight_repair: bool = False
    transform: dict | None = None


class StatsRequest(BaseModel):
    tokens: list[int] | None = None
    silk: str | None = None
    config: dict | None = None


class MetricsRequest(BaseModel):
    pred_obj: str
    gt_obj: str
    samples: int = 8192
    seed: int = 42


class PrepEntryRequest(BaseModel):
    obj: str
    name: str = ""
    category: str = ""
    config: dict | None = None


class ScheduleRequest(BaseModel):
    counts: dict[str, int]
    epochs: int


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.get("/vocab")
def vocab() -> dict:
    v = Vocabulary()
    return {
        "C": v.C, "U": v.U, "E": v.E,
        "blockBase": v.block_base, "blockCount": v.block_count,
        "offsetBase": v.offset_base, "offsetCount": v.offset_count,
        "selfBase": v.self_base, "selfCount": v.self_count,
        "selfWindowCount": v.self_window_count,
        "betweenBase": v.between_base, "betweenCount": v.between_count,
        "total": v.total,
    }


@app.post("/repair")
def repair(req: RepairRequest) -> dict:
    config = _config_from(req.config)
    mesh, dropped = parse_obj(req.obj)
    quantized = quantize(normalize(mesh), config.resolution)
    repaired, log = repair_non_manifold(quantized)
    report = validate_manifold(repaired)
    return {
        "obj": format_obj(repaired),
        "repair": log.to_dict(),
        "manifold": report.is_manifold,
        "mergedVertices": quantized.merged_vertices,
        "removedFaces": quantized.removed_faces,
        "droppedFaces": dropped,
        "transform": {
            "scale": repaired.transform.scale,
            "center": list(repaired.transform.center),
        },
    }


@app.post("/encode")
def encode(req: EncodeRequest) -> dict:
    config = _config_from(req.config)
    mesh, dropped = parse_obj(req.obj)
    if req.repair:
        result = preprocess(mesh, config)
        quantized = result.mesh
        repair_log = result.repair_log.to_dict()
    else:
        quantized = quantize(normalize(mesh), config.resolution)
        repair_log = None
    tokens = encode_mesh(quantized, config)
    stats = sequence_stats(tokens, quantized.face_count, config)
    return {
        "tokens": tokens,
        "silk": base64.b64encode(tokens_to_bytes(tokens)).decode("ascii"),
        "stats": stats,
        "repair": repair_log,
        "droppedFaces": dropped,
        "transform": {
            "scale": quantized.transform.scale,
            "center": list(quantized.transform.center),
        },
    }


@app.post("/decode")
def decode(req: DecodeRequest) -> dict:
    config = _config_from(req.config)
    tokens = _tokens_from_request(req)
    decoded = decode_tokens(tokens, config, salvage=req.salvage)
    hole_report = None
    mesh = decoded.mesh
    if req.watertight_repair:
        mesh, report = repair_holes(decoded, config)
        hole_report = report.to_dict()
    if req.transform:
        transform = Transform(
            scale=float(req.transform["scale"]),
            center=tuple(float(x) for x in req.transform["center"]),
        )
        mesh = type(mesh)(
            mesh.vertices, mesh.faces, resolution=mesh.resolution, transform=transform
        )
        raw = mesh.to_raw(denormalize=True)
    else:
        raw = mesh.to_raw()
    holes = detect_holes(mesh)
    return {
        "obj": format_obj(raw),
        "vertices": mesh.vertex_count,
        "faces": mesh.face_count,
        "boundaryEdges": holes.boundary_edges_after,
        "warnings": decoded.warnings,
        "holeRepair": hole_report,
    }


@app.post("/stats")
def stats(req: StatsRequest) -> dict:
    config = _config_from(req.config)
    tokens = _tokens_from_request(req)
    decoded = decode_tokens(tokens, config, salvage=True)
    result = sequence_stats(tokens, decoded.mesh.face_count, config)
    result["vertices"] = decoded.mesh.vertex_count
    result["components"] = len(decoded.components)
    return result


@app.post("/metrics")
def metrics(req: MetricsRequest) -> dict:
    pred, _ = parse_obj(req.pred_obj)
    gt, _ = parse_obj(req.gt_obj)
    record = metrics_mod.evaluate(pred, gt, samples=req.samples, seed=req.seed)
    result = record.to_dict()
    result["avgDegreePred"] = metrics_mod.average_degree(pred)
    result["avgDegreeGt"] = metrics_mod.average_degree(gt)
    result["eulerPred"] = euler_characteristic(pred)
    result["eulerGt"] = euler_characteristic(gt)
    return result


@app.post("/prep/entry")
def prep_entry(req: PrepEntryRequest) -> dict:
    config = _config_from(req.config)
    mesh, _ = parse_obj(req.obj)
    processed = preprocess(mesh, config).mesh
    try:
        width = dataset._max_layer_width(processed, config)
    except SilkmeshError as exc:
        return dataset.CorpusEntry(req.name, req.category, False, reason=str(exc)).to_dict()
    if width > config.max_layer_width:
        entry = dataset.CorpusEntry(
            req.name, req.category, False,
            reason=f"layer width {width} > {config.max_layer_width}",
            faces=processed.face_count, vertices=processed.vertex_count,
            max_layer_width=width,
        )
        return entry.to_dict()
    try:
        tokens = encode_mesh(processed, config)
    except SilkmeshError as exc:
        return dataset.CorpusEntry(req.name, req.category, False, reason=str(exc)).to_dict()
    accepted = len(tokens) <= config.max_tokens
    entry = dataset.CorpusEntry(
        req.name, req.category, accepted,
        reason=None if accepted else f"{len(tokens)} tokens > {config.max_tokens}",
        tokens=len(tokens), faces=processed.face_count,
        vertices=processed.vertex_count, max_layer_width=width,
    )
    return entry.to_dict()


@app.post("/prep/schedule")
def prep_schedule(req: ScheduleRequest) -> dict:
    return {
        "categories": sorted(req.counts),
        "schedule": dataset.sampling_schedule(req.counts, req.epochs),
    }
