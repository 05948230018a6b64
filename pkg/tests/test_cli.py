"""Command-line interface tests (in-process service transport)."""

import json

import numpy as np
import pytest
from click.testing import CliRunner

import shapes
from silkmesh import save_mesh
from silkmesh.cli import main
from silkmesh.tokens import tokens_to_bytes


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def sphere_obj(tmp_path):
    path = tmp_path / "sphere.obj"
    save_mesh(shapes.icosphere(1), path)
    return str(path)


def test_encode_decode_round_trip(runner, tmp_path, sphere_obj):
    silk = str(tmp_path / "sphere.silk")
    out = str(tmp_path / "back.obj")
    r = runner.invoke(main, ["encode", sphere_obj, silk])
    assert r.exit_code == 0, r.output
    assert "encoded:" in r.output
    r = runner.invoke(main, ["decode", silk, out])
    assert r.exit_code == 0, r.output
    assert "42 vertices, 80 faces, 0 boundary edges" in r.output


def test_encode_text_listing(runner, tmp_path, sphere_obj):
    txt = str(tmp_path / "tokens.txt")
    r = runner.invoke(main, ["encode", sphere_obj, txt, "--text"])
    assert r.exit_code == 0
    tokens = [int(line) for line in open(txt)]
    assert tokens[0] == 0 and tokens[-1] == 2
    out = str(tmp_path / "back.obj")
    assert runner.invoke(main, ["decode", txt, out]).exit_code == 0


def test_encode_stats_flag(runner, tmp_path, sphere_obj):
    r = runner.invoke(
        main, ["encode", sphere_obj, str(tmp_path / "s.silk"), "--stats"]
    )
    assert r.exit_code == 0
    stats = json.loads(r.output)
    assert stats["faces"] == 80 and 1.5 < stats["tokensPerFace"] < 3.0


def test_transform_round_trip(runner, tmp_path):
    raw = shapes.octahedron()
    scaled = type(raw)(raw.vertices * 5.0 - 2.0, raw.faces)
    src = tmp_path / "scaled.obj"
    save_mesh(scaled, src)
    silk = str(tmp_path / "m.silk")
    tf = str(tmp_path / "m.transform.json")
    out = str(tmp_path / "back.obj")
    assert runner.invoke(
        main, ["encode", str(src), silk, "--transform", tf]
    ).exit_code == 0
    assert runner.invoke(
        main, ["decode", silk, out, "--transform", tf]
    ).exit_code == 0
    verts = np.array(
        [
            [float(x) for x in line.split()[1:]]
            for line in open(out)
            if line.startswith("v ")
        ]
    )
    assert np.ptp(verts, axis=0).max() == pytest.approx(10.0, abs=0.1)


def test_repair_command(runner, tmp_path):
    mesh = shapes.pinched_fans()
    from silkmesh.mesh import RawMesh

    src = tmp_path / "pinched.obj"
    save_mesh(RawMesh(mesh.vertices.astype(float), mesh.faces), src)
    out = str(tmp_path / "fixed.obj")
    report = str(tmp_path / "report.json")
    r = runner.invoke(main, ["repair", str(src), out, "--report", report])
    assert r.exit_code == 0, r.output
    assert "manifold=True" in r.output
    data = json.loads(open(report).read())
    assert data["manifold"] is True and data["repair"]["duplicatesCreated"]


def test_stats_command(runner, tmp_path, sphere_obj):
    silk = str(tmp_path / "s.silk")
    runner.invoke(main, ["encode", sphere_obj, silk])
    r = runner.invoke(main, ["stats", silk])
    assert r.exit_code == 0
    body = json.loads(r.output)
    assert body["faces"] == 80 and body["components"] == 1


def test_metrics_command(runner, sphere_obj):
    r = runner.invoke(main, ["metrics", sphere_obj, sphere_obj, "--samples", "512"])
    assert r.exit_code == 0
    body = json.loads(r.output)
    assert body["fr"] == 1.0 and body["absNc"] > 0.9


def test_prep_entry_and_schedule(runner, tmp_path, sphere_obj):
    manifest = str(tmp_path / "manifest.jsonl")
    r = runner.invoke(
        main,
        ["prep", "entry", sphere_obj, "--category", "sphere",
         "--manifest", manifest],
    )
    assert r.exit_code == 0 and "accepted" in r.output
    csv_path = str(tmp_path / "schedule.csv")
    r = runner.invoke(
        main,
        ["prep", "schedule", "--manifest", manifest, "--epochs", "4",
         "--output", csv_path],
    )
    assert r.exit_code == 0
    lines = open(csv_path).read().splitlines()
    assert lines[0] == "epoch,sphere" and len(lines) == 6


def test_exit_code_io_on_missing_input(runner, tmp_path):
    r = runner.invoke(main, ["encode", str(tmp_path / "nope.obj"),
                             str(tmp_path / "out.silk")])
    assert r.exit_code == 2


def test_exit_code_io_on_bad_obj(runner, tmp_path):
    bad = tmp_path / "bad.obj"
    bad.write_text("this is not a mesh\n")
    r = runner.invoke(main, ["encode", str(bad), str(tmp_path / "out.silk")])
    assert r.exit_code == 2


def test_exit_code_token_on_bad_stream(runner, tmp_path):
    silk = tmp_path / "bad.silk"
    silk.write_bytes(tokens_to_bytes([2]))  # valid container, bad grammar
    r = runner.invoke(main, ["decode", str(silk), str(tmp_path / "out.obj")])
    assert r.exit_code == 4


def test_exit_code_capacity(runner, tmp_path, sphere_obj):
    cfg = tmp_path / "tiny.toml"
    cfg.write_text("[codec]\nmax_layer_width = 2\n")
    r = runner.invoke(
        main,
        ["--config", str(cfg), "encode", sphere_obj, str(tmp_path / "o.silk")],
    )
    assert r.exit_code == 3


def test_config_env_var(runner, tmp_path, sphere_obj, monkeypatch):
    cfg = tmp_path / "tiny.toml"
    cfg.write_text("[codec]\nmax_layer_width = 2\n")
    monkeypatch.setenv("SILKSONG_CONFIG", str(cfg))
    r = runner.invoke(main, ["encode", sphere_obj, str(tmp_path / "o.silk")])
    assert r.exit_code == 3  # the env-supplied config is honored
