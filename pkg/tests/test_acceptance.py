"""End-to-end acceptance suite.

Each test checks one headline guarantee of the codec at its stated
tolerance and prints a single pass/fail line.
"""

import itertools
import time

import numpy as np
import pytest

import shapes
from silkmesh import (
    CodecConfig,
    Vocabulary,
    decode_tokens,
    encode_mesh,
    normalize,
    quantize,
    repair_holes,
    repair_non_manifold,
    sequence_stats,
    validate_manifold,
)
from silkmesh.codec import (
    build_between_codebook,
    decode_between_token,
    decode_self_rows,
    encode_between_row,
    encode_self_rows,
)
from silkmesh.dataset import (
    class_balanced,
    instance_balanced,
    sampling_probability,
)
from silkmesh.errors import InvalidToken
from silkmesh.metrics import evaluate, average_degree, signed_volume
from silkmesh.mesh import QuantizedMesh
from silkmesh.tokens import tokens_to_vertex, vertex_to_tokens
from silkmesh.watertight import boundary_edges, detect_holes


def report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[{status}] {name}{suffix}")
    assert ok, f"{name}{suffix}"


def prep(raw):
    return quantize(normalize(raw), 128)


def fixture_corpus():
    meshes = [
        ("triangle", prep(shapes.triangle())),
        ("quad-fan", prep(shapes.fan())),
        ("tetrahedron", prep(shapes.tetrahedron())),
        ("octahedron", prep(shapes.octahedron())),
        ("icosphere-1", prep(shapes.icosphere(1))),
        ("icosphere-2", prep(shapes.icosphere(2))),
        ("icosphere-3", prep(shapes.icosphere(3))),
        ("icosphere-4", prep(shapes.icosphere(4))),
        ("torus", prep(shapes.torus())),
    ]
    for k, raw in enumerate(shapes.random_manifold_meshes(20, seed=7)):
        meshes.append((f"random-{k}", prep(raw)))
    return meshes


def face_keys(mesh):
    coords = [tuple(map(int, v)) for v in mesh.vertices]
    keys = set()
    for a, b, c in mesh.faces:
        tri = (coords[int(a)], coords[int(b)], coords[int(c)])
        keys.add(min(tri[k:] + tri[:k] for k in range(3)))
    return keys


def test_vocabulary_arithmetic():
    start = time.monotonic()
    v = Vocabulary.from_config(CodecConfig(window=8, between_window=5,
                                           max_layer_width=200))
    ok = (
        v.self_count == 456
        and v.between_count == 5200
        and build_between_codebook(5).size == 26
        and v.total == 10267
    )
    elapsed = time.monotonic() - start
    report("vocabulary arithmetic: 456 + 5200 tables, 10267 total",
           ok and elapsed < 1.0, f"total={v.total}, {elapsed:.2f}s")


def test_round_trip_identity():
    start = time.monotonic()
    failures = []
    for name, mesh in fixture_corpus():
        decoded = decode_tokens(encode_mesh(mesh))
        same_vertices = sorted(
            tuple(map(int, v)) for v in decoded.mesh.vertices
        ) == sorted(tuple(map(int, v)) for v in mesh.vertices)
        same_faces = face_keys(decoded.mesh) == face_keys(mesh)
        fr = decoded.mesh.face_count / mesh.face_count
        hole_delta = (
            detect_holes(decoded.mesh).boundary_edges_before
            - detect_holes(mesh).boundary_edges_before
        )
        if not (same_vertices and same_faces and fr == 1.0 and hole_delta == 0):
            failures.append(name)
    elapsed = time.monotonic() - start
    report(
        "round-trip identity on 29-fixture corpus (FR=1, exact faces, <30s)",
        not failures and elapsed < 30.0,
        f"failures={failures or 'none'}, {elapsed:.1f}s",
    )


def test_compression_ratio():
    start = time.monotonic()
    rows = []
    for name, mesh in [
        ("icosphere-3", prep(shapes.icosphere(3))),
        ("icosphere-4", prep(shapes.icosphere(4))),
        ("icosphere-5", prep(shapes.icosphere(5))),
        ("torus", prep(shapes.torus())),
    ]:
        stats = sequence_stats(encode_mesh(mesh), mesh.face_count)
        rows.append((name, stats["tokensPerFace"], stats["compressionRatio"]))
    per_face_ok = all(1.8 <= tpf <= 2.4 for _, tpf, _ in rows)
    ratio_ok = all(0.20 <= r <= 0.27 for _, _, r in rows)
    # the largest sphere sits closest to the asymptote 2/9
    largest_ok = rows[2][2] <= 0.24
    trend_ok = rows[0][1] >= rows[1][1] >= rows[2][1]
    elapsed = time.monotonic() - start
    report(
        "compression: tokens/face in [1.8,2.4] -> 2, ratio in [0.20,0.27]",
        per_face_ok and ratio_ok and largest_ok and trend_ok and elapsed < 60.0,
        ", ".join(f"{n}={tpf:.3f}/{r:.4f}" for n, tpf, r in rows)
        + f", {elapsed:.1f}s",
    )


def test_average_degree_law():
    start = time.monotonic()
    ico5 = prep(shapes.icosphere(5))
    degree = average_degree(ico5)
    identities = []
    for raw in [shapes.tetrahedron(), shapes.octahedron(), shapes.icosphere(2),
                shapes.icosphere(4)]:
        mesh = prep(raw)
        v = mesh.vertex_count
        f = mesh.face_count
        e = f * 3 // 2
        identities.append(abs(2 * e / v - 3 * f / (f / 2 + 2)))
    elapsed = time.monotonic() - start
    report(
        "average degree: icosphere-5 in [5.9,6.0], closed-surface identity <1e-9",
        5.9 <= degree <= 6.0 and max(identities) < 1e-9 and elapsed < 10.0,
        f"degree={degree:.4f}, max|identity|={max(identities):.1e}, {elapsed:.1f}s",
    )


def fig_fan():
    # apex with a dangling extra triangle hanging off one fan edge
    coords = np.array(
        [[60, 60, 60], [70, 60, 60], [60, 70, 60], [60, 60, 70], [50, 50, 50]]
    )
    faces = np.array([[0, 3, 4], [0, 3, 2], [0, 1, 3], [0, 2, 1]])
    return QuantizedMesh(coords, faces)


def test_repair_totality():
    start = time.monotonic()
    cases = [fig_fan(), shapes.pinched_fans(), shapes.book_edge(3),
             shapes.glued_tetrahedra()]
    cases += [shapes.fuzzed_nonmanifold(seed) for seed in range(196)]
    failures = 0
    for mesh in cases:
        out, _ = repair_non_manifold(mesh)
        positions_ok = (
            {tuple(map(int, v)) for v in out.vertices}
            == {tuple(map(int, v)) for v in mesh.vertices}
        )
        if not (validate_manifold(out).is_manifold
                and out.face_count == mesh.face_count and positions_ok):
            failures += 1
    elapsed = time.monotonic() - start
    report(
        "repair totality: 200 fuzzed non-manifold meshes all repaired",
        failures == 0 and elapsed < 120.0,
        f"failures={failures}/200, {elapsed:.1f}s",
    )


def test_winding_consistency():
    start = time.monotonic()
    closed_genus0 = [shapes.tetrahedron(), shapes.octahedron(), shapes.cube(),
                     shapes.icosphere(1), shapes.icosphere(2), shapes.icosphere(3)]
    winding_ok = True
    volume_ok = True
    for name, mesh in fixture_corpus():
        decoded = decode_tokens(encode_mesh(mesh))
        directed = [
            (int(f[k]), int(f[(k + 1) % 3]))
            for f in decoded.mesh.faces
            for k in range(3)
        ]
        if len(directed) != len(set(directed)):
            winding_ok = False  # an interior edge traversed twice one way
    for raw in closed_genus0:
        mesh = prep(raw)
        decoded = decode_tokens(encode_mesh(mesh))
        if signed_volume(decoded.mesh) <= 0:
            volume_ok = False
    ico3 = prep(shapes.icosphere(3))
    decoded = decode_tokens(encode_mesh(ico3))
    record = evaluate(decoded.mesh, ico3, samples=8192, seed=42)
    elapsed = time.monotonic() - start
    report(
        "winding: unique directed edges, positive volume, |NC| >= 0.99",
        winding_ok and volume_ok and record.abs_nc >= 0.99,
        f"|NC|={record.abs_nc:.5f}, {elapsed:.1f}s",
    )


def _drop_cases(decoded):
    structure = decoded.components[0]
    for level, entries in enumerate(structure.self_entries):
        for e in sorted(map(sorted, entries)):
            yield ("self", level, frozenset(e))
    for level, entries in enumerate(structure.between_entries):
        for e in sorted(entries):
            yield ("between", level, e)


def _rederive(decoded):
    from silkmesh.tokens import DecodedMesh, derive_faces

    faces = []
    for structure, ids in zip(decoded.components, decoded.vertex_ids):
        faces.extend(derive_faces(structure, ids))
    mesh = QuantizedMesh(
        decoded.mesh.vertices.copy(),
        np.array(faces, dtype=np.int64).reshape(-1, 3),
        resolution=decoded.mesh.resolution,
    )
    return DecodedMesh(mesh, decoded.components, decoded.vertex_ids)


def _non_manifold_edge(faces) -> bool:
    from collections import Counter

    counts = Counter()
    for a, b, c in faces:
        for u, v in ((a, b), (b, c), (c, a)):
            counts[(u, v) if u < v else (v, u)] += 1
    return any(n > 2 for n in counts.values())


def test_watertight_repair_rate():
    start = time.monotonic()
    sources = [prep(shapes.icosphere(2)), prep(shapes.icosphere(1)),
               prep(shapes.octahedron()), prep(shapes.torus())]
    attempted = 0
    restored = 0
    regressions = 0
    for mesh in sources:
        tokens = encode_mesh(mesh)
        for kind, level, entry in _drop_cases(decode_tokens(tokens)):
            if attempted >= 500:
                break
            decoded = decode_tokens(tokens)
            structure = decoded.components[0]
            if kind == "self":
                structure.self_entries[level].discard(entry)
            else:
                structure.between_entries[level].discard(entry)
            holed = _rederive(decoded)
            before = len(boundary_edges(
                [tuple(map(int, f)) for f in holed.mesh.faces]
            ))
            repaired, rep = repair_holes(holed)
            after = rep.boundary_edges_after
            attempted += 1
            if after == 0:
                restored += 1
            faces = [tuple(map(int, f)) for f in repaired.faces]
            if after > before or _non_manifold_edge(faces):
                regressions += 1
        if attempted >= 500:
            break
    elapsed = time.monotonic() - start
    rate = restored / attempted
    report(
        "watertight repair: >=90% of 500 single-entry drops restored, no regressions",
        attempted == 500 and rate >= 0.9 and regressions == 0 and elapsed < 300.0,
        f"restored={restored}/{attempted}, regressions={regressions}, {elapsed:.1f}s",
    )


def test_codec_bijectivity():
    start = time.monotonic()
    # self-layer: exhaustive over all entry sets for M <= 6 at W = 3
    self_ok = True
    for size in range(2, 7):
        pairs = [frozenset(p) for p in itertools.combinations(range(1, size + 1), 2)]
        for bits in range(2 ** len(pairs)):
            entries = {p for k, p in enumerate(pairs) if bits >> k & 1}
            codes = encode_self_rows(entries, size, 3, capacity=200)
            if decode_self_rows(codes, size, 3, capacity=200) != entries:
                self_ok = False

    # between-layer: decode-encode identity over the whole token table (m=40)
    cb = build_between_codebook(5)
    between_ok = True
    cols = 40
    for token in range(40 * cb.size):
        try:
            columns = decode_between_token(token, cols, cb, capacity=40)
        except InvalidToken:
            continue
        if encode_between_row(columns, cols, cb, capacity=40) != token:
            between_ok = False

    # vertex tokens: bijective over the full 128^3 grid
    seen = np.zeros(4096 * 512, dtype=bool)
    vertex_ok = True
    for x in range(128):
        for y in range(128):
            for z in range(128):
                block, offset = vertex_to_tokens((x, y, z))
                if tokens_to_vertex(block, offset) != (x, y, z):
                    vertex_ok = False
                seen[block * 512 + offset] = True
    vertex_ok = vertex_ok and bool(seen.all())
    elapsed = time.monotonic() - start
    report(
        "codec bijectivity: self (M<=6), between token table, 128^3 vertex grid",
        self_ok and between_ok and vertex_ok and elapsed < 120.0,
        f"{elapsed:.1f}s",
    )


def test_sampling_schedule():
    start = time.monotonic()
    rng = np.random.default_rng(11)
    ok = True
    for _ in range(100):
        k = int(rng.integers(2, 8))
        counts = {f"c{i}": int(rng.integers(1, 500)) for i in range(k)}
        total_epochs = int(rng.integers(1, 50))
        t = int(rng.integers(0, total_epochs + 1))
        probs = sampling_probability(counts, t, total_epochs)
        if abs(sum(probs.values()) - 1.0) > 1e-12:
            ok = False
        if t == 0 and probs != instance_balanced(counts):
            ok = False
        if t == total_epochs and probs != class_balanced(counts):
            ok = False
    elapsed = time.monotonic() - start
    report(
        "sampling schedule: endpoints match balanced distributions, rows sum to 1",
        ok and elapsed < 1.0,
        f"{elapsed:.2f}s",
    )
