"""End-to-end mesh <-> token-sequence conversion.

Sequence grammar, per connected component::

    component := C blk off U (layer U)* layer E
    layer     := vgroup+
    vgroup    := blk off selfWindow selfExtra* between

The component's first vertex (layer 0) carries only its two position
tokens; every later vertex carries position, self-layer and between-layer
topology tokens.
"""

from __future__ import annotations

import struct
from collections import defaultdict, deque
from dataclasses import dataclass, field

import numpy as np

from .codec import (
    SelfRowCode,
    build_between_codebook,
    decode_between_token,
    decode_self_rows,
    encode_between_row_multi,
    encode_self_rows,
)
from .config import CodecConfig, Vocabulary
from .errors import GrammarError, InvalidToken, MeshIOError, SilkmeshError
from .halfedge import build_half_edge
from .layering import layer_component, build_matrices
from .mesh import ComponentLabels, QuantizedMesh, connected_components

MAGIC = b"SILK"
FORMAT_VERSION = 1


def vertex_to_tokens(q: tuple[int, int, int], resolution: int = 128) -> tuple[int, int]:
    """(block, offset) pair for a grid coordinate; bijective over the grid."""
    blocks_per_axis = resolution // 8
    qx, qy, qz = (int(v) for v in q)
    for v in (qx, qy, qz):
        if not (0 <= v < resolution):
            raise ValueError(f"coordinate {v} outside [0, {resolution})")
    block = (qx // 8) * blocks_per_axis**2 + (qy // 8) * blocks_per_axis + (qz // 8)
    offset = (qx % 8) * 64 + (qy % 8) * 8 + (qz % 8)
    return block, offset


def tokens_to_vertex(block: int, offset: int, resolution: int = 128) -> tuple[int, int, int]:
    blocks_per_axis = resolution // 8
    if not (0 <= block < blocks_per_axis**3):
        raise InvalidToken(f"block index {block} out of range")
    if not (0 <= offset < 512):
        raise InvalidToken(f"offset index {offset} out of range")
    bx, rem = divmod(block, blocks_per_axis**2)
    by, bz = divmod(rem, blocks_per_axis)
    ox, rem = divmod(offset, 64)
    oy, oz = divmod(rem, 8)
    return bx * 8 + ox, by * 8 + oy, bz * 8 + oz


@dataclass
class ComponentStructure:
    """Per-component layered topology surviving decode (used by hole repair)."""

    coords: list[list[tuple[int, int, int]]]          # [layer][order-1] grid coords
    self_entries: list[set[frozenset[int]]]           # [layer] unordered order pairs
    between_entries: list[set[tuple[int, int]]]       # [layer] (row in L, col in L-1)

    @property
    def depth(self) -> int:
        return len(self.coords) - 1

    def layer_size(self, level: int) -> int:
        return len(self.coords[level])


@dataclass
class DecodedMesh:
    mesh: QuantizedMesh
    components: list[ComponentStructure]
    vertex_ids: list[list[list[int]]]   # [component][layer][order-1] -> global id
    warnings: list[str] = field(default_factory=list)


def _ascending(u: int, w: int, size: int) -> tuple[int, int]:
    """Edge direction along the layer's cyclic order (lower to higher)."""
    if (w - u) % size == 1:
        return u, w
    if (u - w) % size == 1:
        return w, u
    return (u, w) if u < w else (w, u)


def _is_cyclic_adjacent(i: int, j: int, size: int) -> bool:
    return size <= 2 or (j - i) % size == 1 or (i - j) % size == 1


def derive_faces(
    structure: ComponentStructure, ids: list[list[int]]
) -> list[tuple[int, int, int]]:
    """Reconstruct winding-consistent faces from the layered matrices.

    Candidate triangles come from three families — (a) one layer-L vertex
    over a connected layer-(L-1) pair, (b) a connected same-layer pair over
    a shared layer-(L-1) vertex, (c) same-layer 3-cliques — and are
    accepted greedily in reliability order (cyclically adjacent pairs
    first) while every triangle edge still bounds fewer than two accepted
    faces.  The saturation rule rejects spurious chord triangles whose
    edges are already fully bound.  Windings are finalized by orientation
    propagation.
    """
    depth = structure.depth
    rows_by_layer: list[dict[int, set[int]]] = [dict() for _ in range(depth + 1)]
    for level in range(1, depth + 1):
        rows: dict[int, set[int]] = defaultdict(set)
        for i, j in structure.between_entries[level]:
            rows[i].add(j)
        rows_by_layer[level] = rows

    # (tier, level, order key, face) — lower tiers are accepted first
    candidates: list[tuple[int, int, tuple, tuple[int, int, int]]] = []

    for level in range(1, depth + 1):
        rows = rows_by_layer[level]
        below = structure.layer_size(level - 1)
        size = structure.layer_size(level)
        # (a) apex in layer L over a connected pair in layer L-1
        for i in sorted(rows):
            cols = sorted(rows[i])
            for a_idx in range(len(cols)):
                for b_idx in range(a_idx + 1, len(cols)):
                    j, jp = cols[a_idx], cols[b_idx]
                    if frozenset((j, jp)) not in structure.self_entries[level - 1]:
                        continue
                    lo, hi = _ascending(j, jp, below)
                    tier = 0 if _is_cyclic_adjacent(j, jp, below) else 2
                    candidates.append((
                        tier, level, (0, i, j, jp),
                        (ids[level - 1][hi - 1], ids[level - 1][lo - 1], ids[level][i - 1]),
                    ))
        # (b) connected same-layer pair over a shared parent
        for entry in sorted(structure.self_entries[level], key=sorted):
            i, ip = sorted(entry)
            common = rows.get(i, set()) & rows.get(ip, set())
            lo, hi = _ascending(i, ip, size)
            tier = 1 if _is_cyclic_adjacent(i, ip, size) else 3
            for k in sorted(common):
                candidates.append((
                    tier, level, (1, i, ip, k),
                    (ids[level][lo - 1], ids[level][hi - 1], ids[level - 1][k - 1]),
                ))

    # (c) same-layer 3-cliques
    for level in range(depth + 1):
        entries = structure.self_entries[level]
        if not entries:
            continue
        adj: dict[int, set[int]] = defaultdict(set)
        for entry in entries:
            i, j = sorted(entry)
            adj[i].add(j)
            adj[j].add(i)
        for i in sorted(adj):
            for j in sorted(x for x in adj[i] if x > i):
                for k in sorted(x for x in adj[i] & adj[j] if x > j):
                    gi, gj, gk = ids[level][i - 1], ids[level][j - 1], ids[level][k - 1]
                    candidates.append((4, level, (2, i, j, k), (gk, gj, gi)))

    faces: list[tuple[int, int, int]] = []
    seen: set[frozenset[int]] = set()
    edge_count: dict[frozenset[int], int] = defaultdict(int)
    for _, _, _, face in sorted(candidates, key=lambda c: c[:3]):
        key = frozenset(face)
        if key in seen:
            continue
        a, b, c = face
        edges = (frozenset((a, b)), frozenset((b, c)), frozenset((a, c)))
        if any(edge_count[e] >= 2 for e in edges):
            continue
        seen.add(key)
        faces.append(face)
        for e in edges:
            edge_count[e] += 1
    return _orient_faces(faces)


def _orient_faces(faces: list[tuple[int, int, int]]) -> list[tuple[int, int, int]]:
    """Propagate a consistent orientation across edge-adjacent faces.

    The per-family winding rules are exact away from the closing cap of a
    surface; anchoring each adjacency component at its first derived face
    and flipping neighbors so shared edges run in opposite directions makes
    the whole component consistent.  Edges bounding more than two faces are
    not propagated across; orientation conflicts keep the rule winding.
    """
    edge_faces: dict[frozenset[int], list[int]] = defaultdict(list)
    for idx, (a, b, c) in enumerate(faces):
        for e in ((a, b), (b, c), (c, a)):
            edge_faces[frozenset(e)].append(idx)

    oriented: list[tuple[int, int, int] | None] = [None] * len(faces)

    def directed(face: tuple[int, int, int]) -> set[tuple[int, int]]:
        a, b, c = face
        return {(a, b), (b, c), (c, a)}

    for seed in range(len(faces)):
        if oriented[seed] is not None:
            continue
        oriented[seed] = faces[seed]
        queue = deque([seed])
        while queue:
            idx = queue.popleft()
            current = oriented[idx]
            for e_dir in directed(current):
                key = frozenset(e_dir)
                incident = edge_faces[key]
                if len(incident) != 2:
                    continue
                other = incident[0] if incident[1] == idx else incident[1]
                if oriented[other] is not None:
                    continue
                a, b, c = faces[other]
                if e_dir in directed(faces[other]):
                    oriented[other] = (a, c, b)
                else:
                    oriented[other] = faces[other]
                queue.append(other)
    return [f for f in oriented if f is not None]


@dataclass
class EncodedComponent:
    tokens: list[int]
    start_key: tuple


def _encode_component(
    he, component_vertices: set[int], config: CodecConfig, vocab: Vocabulary
) -> EncodedComponent:
    labeling = layer_component(he, component_vertices, config)
    self_mats, between_mats = build_matrices(he, labeling)
    codebook = build_between_codebook(config.between_window)
    mesh = he.mesh

    def vertex_tokens(v: int) -> list[int]:
        block, offset = vertex_to_tokens(tuple(mesh.vertices[v]), config.resolution)
        return [vocab.block_base + block, vocab.offset_base + offset]

    origin, destination = labeling.start_half_edge
    o = mesh.vertices[origin]
    d = mesh.vertices[destination]
    start_key = (
        int(o[1]), int(o[2]), int(o[0]),
        int(d[1]), int(d[2]), int(d[0]),
        origin, destination,
    )

    tokens: list[int] = [vocab.C]
    tokens.extend(vertex_tokens(origin))
    tokens.append(vocab.U)
    depth = len(labeling.layers) - 1
    between_rows = {m.layer: m for m in between_mats}
    for level in range(1, depth + 1):
        layer = labeling.layers[level]
        self_codes = encode_self_rows(
            self_mats[level].entries, len(layer), config.window, config.max_layer_width
        )
        rows = defaultdict(set)
        for i, j in between_rows[level].entries:
            rows[i].add(j)
        for i, v in enumerate(layer, start=1):
            tokens.extend(vertex_tokens(v))
            code = self_codes[i - 1]
            tokens.append(vocab.self_base + code.window_token)
            for extra in code.extra_tokens:
                tokens.append(vocab.self_base + vocab.self_window_count + extra)
            for between in encode_between_row_multi(
                rows[i],
                len(labeling.layers[level - 1]),
                codebook,
                config.max_layer_width,
            ):
                tokens.append(vocab.between_base + between)
        tokens.append(vocab.U if level < depth else vocab.E)
    return EncodedComponent(tokens, start_key)


def encode_mesh(mesh: QuantizedMesh, config: CodecConfig | None = None) -> list[int]:
    """Tokenize a manifold quantized mesh, components in start-edge order."""
    config = config or CodecConfig()
    vocab = Vocabulary.from_config(config)
    he = build_half_edge(mesh)
    labels: ComponentLabels = connected_components(mesh)
    groups: dict[int, set[int]] = defaultdict(set)
    for v in range(mesh.vertex_count):
        groups[int(labels.component_of[v])].add(v)
    encoded = []
    for comp_vertices in groups.values():
        if not any(v in he.out_edges for v in comp_vertices):
            continue  # isolated vertices carry no faces and no tokens
        encoded.append(_encode_component(he, comp_vertices, config, vocab))
    encoded.sort(key=lambda c: c.start_key)
    tokens: list[int] = []
    for comp in encoded:
        tokens.extend(comp.tokens)
    return tokens


@dataclass
class _ParsedGroup:
    coords: tuple[int, int, int]
    self_window: int | None = None       # None for the layer-0 vertex
    self_extras: tuple[int, ...] = ()
    between_raw: tuple[int, ...] = ()    # one or more window tokens


def _parse_components(
    tokens: list[int], config: CodecConfig, vocab: Vocabulary, salvage: bool
) -> tuple[list[list[list[_ParsedGroup]]], list[str]]:
    """Parse the token grammar into per-component, per-layer vertex groups."""
    warnings: list[str] = []
    components: list[list[list[_ParsedGroup]]] = []
    pos = 0
    n = len(tokens)

    def fail(message: str, at: int):
        raise GrammarError(message, at)

    def classify(t: int) -> str:
        kind = vocab.classify(t)
        if kind == "invalid":
            raise GrammarError(f"token {t} outside vocabulary", pos)
        return kind

    try:
        while pos < n:
            if tokens[pos] != vocab.C:
                fail("expected component-start token C", pos)
            pos += 1
            component: list[list[_ParsedGroup]] = []
            components.append(component)

            def read_position() -> tuple[int, int, int]:
                nonlocal pos
                if pos >= n or classify(tokens[pos]) != "block":
                    fail("expected block token", pos)
                block = tokens[pos] - vocab.block_base
                pos += 1
                if pos >= n or classify(tokens[pos]) != "offset":
                    fail("expected offset token", pos)
                offset = tokens[pos] - vocab.offset_base
                pos += 1
                return tokens_to_vertex(block, offset, config.resolution)

            component.append([_ParsedGroup(read_position())])
            if pos >= n or tokens[pos] != vocab.U:
                fail("expected layer separator U after the start vertex", pos)
            pos += 1

            closed = False
            while not closed:
                layer: list[_ParsedGroup] = []
                component.append(layer)
                while True:
                    if pos >= n:
                        fail("sequence truncated inside a layer", pos)
                    t = tokens[pos]
                    if t == vocab.U or t == vocab.E:
                        if not layer:
                            fail("empty layer", pos)
                        closed = t == vocab.E
                        pos += 1
                        break
                    group = _ParsedGroup(read_position())
                    if pos >= n or classify(tokens[pos]) != "self-window":
                        fail("expected self-layer window token", pos)
                    group.self_window = tokens[pos] - vocab.self_base
                    pos += 1
                    extras = []
                    while pos < n and classify(tokens[pos]) == "self-extra":
                        extras.append(
                            tokens[pos] - vocab.self_base - vocab.self_window_count
                        )
                        pos += 1
                    group.self_extras = tuple(extras)
                    if pos >= n or classify(tokens[pos]) != "between":
                        fail("expected between-layer token", pos)
                    between = []
                    while pos < n and classify(tokens[pos]) == "between":
                        between.append(tokens[pos] - vocab.between_base)
                        pos += 1
                    group.between_raw = tuple(between)
                    layer.append(group)
    except GrammarError as exc:
        if not salvage:
            raise
        warnings.append(f"salvage: truncated at token {exc.position}: {exc}")
        # drop the trailing partial layer marker if the last component is open
        if components and components[-1] and not components[-1][-1] and len(components[-1]) > 1:
            components[-1].pop()
        components = [c for c in components if c and c[0]]
    return components, warnings


def decode_tokens(
    tokens: list[int], config: CodecConfig | None = None, salvage: bool = False
) -> DecodedMesh:
    """Rebuild a quantized mesh (vertices, winding-consistent faces) from tokens."""
    config = config or CodecConfig()
    vocab = Vocabulary.from_config(config)
    codebook = build_between_codebook(config.between_window)
    parsed, warnings = _parse_components(tokens, config, vocab, salvage)

    structures: list[ComponentStructure] = []
    vertex_ids: list[list[list[int]]] = []
    all_coords: list[tuple[int, int, int]] = []
    all_faces: list[tuple[int, int, int]] = []

    for component in parsed:
        coords = [[g.coords for g in layer] for layer in component]
        depth = len(coords) - 1
        self_entries: list[set[frozenset[int]]] = [set() for _ in range(depth + 1)]
        between_entries: list[set[tuple[int, int]]] = [set() for _ in range(depth + 1)]
        for level in range(1, depth + 1):
            layer = component[level]
            size = len(layer)
            codes = [
                SelfRowCode(g.self_window or 0, g.self_extras) for g in layer
            ]
            try:
                self_entries[level] = set(
                    decode_self_rows(
                        codes, size, config.window, config.max_layer_width,
                        strict=config.strict_decode and not salvage,
                    )
                )
            except InvalidToken:
                if not salvage:
                    raise
                warnings.append(f"salvage: dropped invalid self-layer rows at layer {level}")
            cols = len(component[level - 1])
            for i, g in enumerate(layer, start=1):
                try:
                    columns: set[int] = set()
                    for raw in g.between_raw:
                        window = decode_between_token(
                            raw, cols, codebook, config.max_layer_width
                        )
                        if columns & window:
                            raise InvalidToken(
                                f"between windows overlap at row {i}"
                            )
                        columns |= window
                except InvalidToken:
                    if not salvage:
                        raise
                    warnings.append(
                        f"salvage: dropped invalid between-layer row {i} at layer {level}"
                    )
                    continue
                between_entries[level].update((i, j) for j in columns)
        structure = ComponentStructure(coords, self_entries, between_entries)
        ids = []
        for layer in coords:
            row_ids = []
            for c in layer:
                row_ids.append(len(all_coords))
                all_coords.append(c)
            ids.append(row_ids)
        all_faces.extend(derive_faces(structure, ids))
        structures.append(structure)
        vertex_ids.append(ids)

    mesh = QuantizedMesh(
        np.array(all_coords, dtype=np.int64).reshape(-1, 3),
        np.array(all_faces, dtype=np.int64).reshape(-1, 3),
        resolution=config.resolution,
    )
    return DecodedMesh(mesh, structures, vertex_ids, warnings)


def rebuild_mesh(decoded: DecodedMesh) -> QuantizedMesh:
    """Re-derive faces from (possibly updated) matrices, keeping existing faces."""
    faces = {tuple(int(x) for x in f) for f in decoded.mesh.faces}
    face_sets = {frozenset(f) for f in faces}
    for structure, ids in zip(decoded.components, decoded.vertex_ids):
        for face in derive_faces(structure, ids):
            if frozenset(face) not in face_sets:
                face_sets.add(frozenset(face))
                faces.add(face)
    ordered = sorted(faces)
    return QuantizedMesh(
        decoded.mesh.vertices.copy(),
        np.array(ordered, dtype=np.int64).reshape(-1, 3),
        resolution=decoded.mesh.resolution,
    )


def serialize_tokens(tokens: list[int], path: str) -> None:
    payload = struct.pack("<4sBBI", MAGIC, FORMAT_VERSION, 0, len(tokens))
    body = b"".join(struct.pack("<H", t) for t in tokens)
    try:
        with open(path, "wb") as fh:
            fh.write(payload + body)
    except OSError as exc:
        raise MeshIOError(f"cannot write {path}: {exc}") from exc


def serialize_tokens_text(tokens: list[int], path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(str(t) for t in tokens))
            if tokens:
                fh.write("\n")
    except OSError as exc:
        raise MeshIOError(f"cannot write {path}: {exc}") from exc


def deserialize_tokens(path: str, vocab_total: int = Vocabulary().total) -> list[int]:
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise MeshIOError(f"cannot read {path}: {exc}") from exc
    return tokens_from_bytes(blob, vocab_total)


def tokens_from_bytes(blob: bytes, vocab_total: int = Vocabulary().total) -> list[int]:
    if len(blob) < 10:
        raise MeshIOError("token file too short")
    magic, version, _reserved, count = struct.unpack("<4sBBI", blob[:10])
    if magic != MAGIC:
        raise MeshIOError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise MeshIOError(f"unsupported format version {version}")
    body = blob[10:]
    if len(body) != 2 * count:
        raise MeshIOError(f"payload length {len(body)} != 2 * {count}")
    tokens = [t[0] for t in struct.iter_unpack("<H", body)]
    bad = [t for t in tokens if t >= vocab_total]
    if bad:
        raise MeshIOError(f"token {bad[0]} outside vocabulary of size {vocab_total}")
    return tokens


def tokens_to_bytes(tokens: list[int]) -> bytes:
    header = struct.pack("<4sBBI", MAGIC, FORMAT_VERSION, 0, len(tokens))
    return header + b"".join(struct.pack("<H", t) for t in tokens)


def deserialize_tokens_text(path: str, vocab_total: int = Vocabulary().total) -> list[int]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            tokens = [int(line) for line in fh.read().split()]
    except (OSError, ValueError) as exc:
        raise MeshIOError(f"cannot read tokens from {path}: {exc}") from exc
    if any(t < 0 or t >= vocab_total for t in tokens):
        raise MeshIOError("token outside vocabulary")
    return tokens


def sequence_stats(tokens: list[int], face_count: int, config: CodecConfig | None = None) -> dict:
    """Token count, tokens/face, compression ratio and per-class histogram."""
    config = config or CodecConfig()
    vocab = Vocabulary.from_config(config)
    histogram: dict[str, int] = defaultdict(int)
    for t in tokens:
        histogram[vocab.classify(t)] += 1
    stats = {
        "tokens": len(tokens),
        "faces": face_count,
        "tokensPerFace": len(tokens) / face_count if face_count else None,
        "compressionRatio": len(tokens) / (9 * face_count) if face_count else None,
        "histogram": dict(sorted(histogram.items())),
    }
    return stats
