"""Command-line client for the codec service.

All work happens through the HTTP API: by default against an in-process
application instance, or against a remote server via ``--server``.
Exit codes: 0 success, 1 validation error, 2 I/O error, 3 capacity
exceeded, 4 invalid token stream.
"""

from __future__ import annotations

import base64
import dataclasses
import json
import sys

import click

from .config import CONFIG_ENV_VAR, load_config
from .errors import MeshIOError
from .tokens import deserialize_tokens_text, tokens_from_bytes

EXIT_CODES = {"validation": 1, "io": 2, "capacity": 3, "token": 4}


class ServiceClient:
    """Minimal wrapper giving local and remote transports the same shape."""

    def __init__(self, server: str | None):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import app

            self._client = TestClient(app)

    def post(self, path: str, payload: dict) -> dict:
        response = self._client.post(path, json=payload)
        body = response.json()
        if response.status_code >= 400:
            kind = body.get("kind", "validation") if isinstance(body, dict) else "validation"
            message = body.get("error", str(body)) if isinstance(body, dict) else str(body)
            click.echo(f"error ({kind}): {message}", err=True)
            sys.exit(EXIT_CODES.get(kind, 1))
        return body

    def get(self, path: str) -> dict:
        response = self._client.get(path)
        return response.json()


def _config_payload(path: str | None) -> dict | None:
    config = load_config(path)
    return dataclasses.asdict(config)


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        click.echo(f"error (io): cannot read {path}: {exc}", err=True)
        sys.exit(EXIT_CODES["io"])


def _write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        click.echo(f"error (io): cannot write {path}: {exc}", err=True)
        sys.exit(EXIT_CODES["io"])


def _write_bytes(path: str, blob: bytes) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(blob)
    except OSError as exc:
        click.echo(f"error (io): cannot write {path}: {exc}", err=True)
        sys.exit(EXIT_CODES["io"])


def _read_tokens_payload(path: str) -> dict:
    """Token input as either a text listing (.txt) or binary container."""
    try:
        if path.endswith(".txt"):
            return {"tokens": deserialize_tokens_text(path)}
        with open(path, "rb") as fh:
            blob = fh.read()
        tokens_from_bytes(blob)  # validate before shipping
        return {"silk": base64.b64encode(blob).decode("ascii")}
    except MeshIOError as exc:
        click.echo(f"error ({exc.kind}): {exc}", err=True)
        sys.exit(EXIT_CODES.get(exc.kind, 2))
    except OSError as exc:
        click.echo(f"error (io): cannot read {path}: {exc}", err=True)
        sys.exit(EXIT_CODES["io"])


@click.group()
@click.option("--server", default=None, help="Remote service URL (default: in-process).")
@click.option(
    "--config",
    "config_path",
    default=None,
    envvar=CONFIG_ENV_VAR,
    help=f"TOML config file (or set {CONFIG_ENV_VAR}).",
)
@click.pass_context
def main(ctx: click.Context, server: str | None, config_path: str | None) -> None:
    """Layered triangle-mesh tokenization codec."""
    ctx.ensure_object(dict)
    ctx.obj["client"] = ServiceClient(server)
    ctx.obj["config"] = _config_payload(config_path)


@main.command()
@click.argument("input_path")
@click.argument("output_path")
@click.option("--report", "report_path", default=None, help="Write a JSON repair report.")
@click.pass_context
def repair(ctx, input_path: str, output_path: str, report_path: str | None) -> None:
    """Normalize, quantize and repair a mesh to a 2-manifold OBJ."""
    body = ctx.obj["client"].post(
        "/repair", {"obj": _read_text(input_path), "config": ctx.obj["config"]}
    )
    _write_text(output_path, body["obj"])
    if report_path:
        report = {k: body[k] for k in ("repair", "manifold", "mergedVertices",
                                       "removedFaces", "droppedFaces", "transform")}
        _write_text(report_path, json.dumps(report, indent=2) + "\n")
    click.echo(
        f"repaired: manifold={body['manifold']} "
        f"duplicated={len(body['repair']['duplicatesCreated'])}"
    )


@main.command()
@click.argument("input_path")
@click.argument("output_path")
@click.option("--text", is_flag=True, help="Write tokens as a decimal text listing.")
@click.option("--no-repair", is_flag=True, help="Skip the non-manifold repair pass.")
@click.option("--stats", "show_stats", is_flag=True, help="Print sequence statistics.")
@click.option("--transform", "transform_path", default=None,
              help="Write the normalization transform as JSON (for exact decode).")
@click.pass_context
def encode(ctx, input_path, output_path, text, no_repair, show_stats, transform_path):
    """Tokenize an OBJ mesh into a binary token container."""
    body = ctx.obj["client"].post(
        "/encode",
        {
            "obj": _read_text(input_path),
            "config": ctx.obj["config"],
            "repair": not no_repair,
        },
    )
    if text or output_path.endswith(".txt"):
        _write_text(output_path, "".join(f"{t}\n" for t in body["tokens"]))
    else:
        _write_bytes(output_path, base64.b64decode(body["silk"]))
    if transform_path:
        _write_text(transform_path, json.dumps(body["transform"]) + "\n")
    if show_stats:
        click.echo(json.dumps(body["stats"], indent=2))
    else:
        click.echo(f"encoded: {body['stats']['tokens']} tokens")


@main.command()
@click.argument("input_path")
@click.argument("output_path")
@click.option("--salvage", is_flag=True, help="Decode best-effort past invalid tokens.")
@click.option("--watertight-repair", is_flag=True, help="Close boundary loops after decoding.")
@click.option("--report", "report_path", default=None, help="Write a JSON decode report.")
@click.option("--transform", "transform_path", default=None,
              help="JSON transform from encoding, to restore original coordinates.")
@click.pass_context
def decode(ctx, input_path, output_path, salvage, watertight_repair, report_path,
           transform_path):
    """Rebuild an OBJ mesh from a token container."""
    payload = _read_tokens_payload(input_path)
    payload["config"] = ctx.obj["config"]
    payload["salvage"] = salvage
    payload["watertight_repair"] = watertight_repair
    if transform_path:
        payload["transform"] = json.loads(_read_text(transform_path))
    body = ctx.obj["client"].post("/decode", payload)
    _write_text(output_path, body["obj"])
    if report_path:
        report = {k: body[k] for k in ("vertices", "faces", "boundaryEdges",
                                       "warnings", "holeRepair")}
        _write_text(report_path, json.dumps(report, indent=2) + "\n")
    click.echo(
        f"decoded: {body['vertices']} vertices, {body['faces']} faces, "
        f"{body['boundaryEdges']} boundary edges"
    )


@main.command()
@click.argument("input_path")
@click.pass_context
def stats(ctx, input_path: str) -> None:
    """Print statistics for a token container."""
    payload = _read_tokens_payload(input_path)
    payload["config"] = ctx.obj["config"]
    body = ctx.obj["client"].post("/stats", payload)
    click.echo(json.dumps(body, indent=2))


@main.command()
@click.argument("pred_path")
@click.argument("gt_path")
@click.option("--samples", default=8192, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.pass_context
def metrics(ctx, pred_path: str, gt_path: str, samples: int, seed: int) -> None:
    """Compare two OBJ meshes (distance, normal and count metrics)."""
    body = ctx.obj["client"].post(
        "/metrics",
        {
            "pred_obj": _read_text(pred_path),
            "gt_obj": _read_text(gt_path),
            "samples": samples,
            "seed": seed,
        },
    )
    click.echo(json.dumps(body, indent=2))


@main.group()
def prep() -> None:
    """Corpus preparation utilities."""


@prep.command()
@click.argument("inputs", nargs=-1, required=True)
@click.option("--category", default="", help="Category label for all inputs.")
@click.option("--manifest", "manifest_path", default=None,
              help="Append entries to a JSONL manifest.")
@click.pass_context
def entry(ctx, inputs, category: str, manifest_path: str | None) -> None:
    """Admit or reject meshes for a training corpus."""
    lines = []
    for path in inputs:
        body = ctx.obj["client"].post(
            "/prep/entry",
            {
                "obj": _read_text(path),
                "name": path,
                "category": category,
                "config": ctx.obj["config"],
            },
        )
        lines.append(json.dumps(body))
        status = "accepted" if body["accepted"] else f"rejected ({body['reason']})"
        click.echo(f"{path}: {status}")
    if manifest_path:
        try:
            with open(manifest_path, "a", encoding="utf-8") as fh:
                fh.write("".join(line + "\n" for line in lines))
        except OSError as exc:
            click.echo(f"error (io): cannot write {manifest_path}: {exc}", err=True)
            sys.exit(EXIT_CODES["io"])


@prep.command()
@click.option("--manifest", "manifest_path", default=None,
              help="JSONL manifest; accepted entries are counted per category.")
@click.option("--counts", "counts_json", default=None,
              help='Category counts as JSON, e.g. \'{"chair": 120, "lamp": 40}\'.')
@click.option("--epochs", required=True, type=int)
@click.option("--output", "output_path", default=None, help="Write the schedule as CSV.")
@click.pass_context
def schedule(ctx, manifest_path, counts_json, epochs: int, output_path) -> None:
    """Per-epoch category sampling probabilities."""
    if counts_json:
        counts = json.loads(counts_json)
    elif manifest_path:
        counts: dict[str, int] = {}
        for line in _read_text(manifest_path).splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            if record.get("accepted"):
                key = record.get("category", "")
                counts[key] = counts.get(key, 0) + 1
    else:
        click.echo("error (validation): provide --counts or --manifest", err=True)
        sys.exit(EXIT_CODES["validation"])
    body = ctx.obj["client"].post("/prep/schedule", {"counts": counts, "epochs": epochs})
    if output_path:
        categories = body["categories"]
        rows = ["epoch," + ",".join(categories)]
        for i, probs in enumerate(body["schedule"]):
            rows.append(f"{i}," + ",".join(f"{probs[c]:.10f}" for c in categories))
        _write_text(output_path, "\n".join(rows) + "\n")
    else:
        click.echo(json.dumps(body, indent=2))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host: str, port: int) -> None:
    """Run the codec service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
