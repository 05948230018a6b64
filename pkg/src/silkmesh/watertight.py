"""Boundary-loop (hole) detection and matrix-level watertightness repair.

Repair never removes faces: it greedily inserts missing topology-matrix
entries (same-layer or between-layer) whose re-derived faces close the
largest number of boundary edges, until the mesh is watertight or the
entry budget runs out.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np

from .codec import build_between_codebook, encode_between_row_multi, encode_self_rows
from .config import CodecConfig
from .errors import EncodingCapacityExceeded, UnencodableRow
from .mesh import QuantizedMesh
from .tokens import ComponentStructure, DecodedMesh, derive_faces


def _directed_usage(faces) -> Counter:
    usage: Counter = Counter()
    for a, b, c in faces:
        usage[(a, b)] += 1
        usage[(b, c)] += 1
        usage[(c, a)] += 1
    return usage


def boundary_edges(faces) -> list[tuple[int, int]]:
    """Directed hole-side edges: face edges whose opposite never occurs."""
    usage = _directed_usage(faces)
    return [(v, u) for (u, v), n in usage.items() if n == 1 and (v, u) not in usage]


def boundary_loops(faces) -> list[list[int]]:
    """Group boundary edges into closed loops (open chains if degenerate)."""
    edges = boundary_edges(faces)
    outgoing: dict[int, list[int]] = defaultdict(list)
    for u, v in edges:
        outgoing[u].append(v)
    for targets in outgoing.values():
        targets.sort()
    remaining = set(edges)
    loops: list[list[int]] = []
    while remaining:
        start = min(remaining)
        loop = [start[0]]
        u, v = start
        remaining.discard(start)
        while v != loop[0]:
            loop.append(v)
            nxt = next(((v, w) for w in outgoing[v] if (v, w) in remaining), None)
            if nxt is None:
                break
            remaining.discard(nxt)
            u, v = nxt
        loops.append(loop)
    return loops


@dataclass
class HoleReport:
    boundary_edges_before: int
    boundary_edges_after: int
    loops_before: list[list[int]]
    added_entries: list[dict] = field(default_factory=list)

    @property
    def watertight(self) -> bool:
        return self.boundary_edges_after == 0

    def to_dict(self) -> dict:
        return {
            "boundaryEdgesBefore": self.boundary_edges_before,
            "boundaryEdgesAfter": self.boundary_edges_after,
            "loops": [list(map(int, loop)) for loop in self.loops_before],
            "addedEntries": self.added_entries,
            "watertight": self.watertight,
        }


def detect_holes(mesh: QuantizedMesh) -> HoleReport:
    faces = [tuple(int(x) for x in f) for f in mesh.faces]
    loops = boundary_loops(faces)
    count = len(boundary_edges(faces))
    return HoleReport(count, count, loops)


@dataclass(frozen=True)
class _Candidate:
    component: int
    kind: str           # "self" | "between"
    layer: int
    i: int
    j: int

    def sort_key(self):
        return (self.layer, self.kind, self.i, self.j)


def _structure_entry_sets(structure: ComponentStructure):
    return structure.self_entries, structure.between_entries


def _is_valid_topology(faces) -> bool:
    """No undirected edge with >2 faces and no repeated directed edge."""
    usage = _directed_usage(faces)
    if any(n > 1 for n in usage.values()):
        return False
    undirected: Counter = Counter()
    for (u, v), n in usage.items():
        undirected[frozenset((u, v))] += n
    return all(n <= 2 for n in undirected.values())


def _self_row_encodable(
    entries: set[frozenset[int]], size: int, config: CodecConfig
) -> bool:
    try:
        encode_self_rows(entries, size, config.window, config.max_layer_width)
        return True
    except (UnencodableRow, EncodingCapacityExceeded, ValueError):
        return False


def _between_row_encodable(
    entries: set[tuple[int, int]], row: int, cols: int, config: CodecConfig
) -> bool:
    codebook = build_between_codebook(config.between_window)
    row_cols = {j for (i, j) in entries if i == row}
    try:
        encode_between_row_multi(row_cols, cols, codebook, config.max_layer_width)
        return True
    except (UnencodableRow, EncodingCapacityExceeded, ValueError):
        return False


def _enumerate_candidates(
    decoded: DecodedMesh, loops: list[list[int]], config: CodecConfig
) -> list[_Candidate]:
    # global vertex id -> (component, layer, 1-based order)
    where: dict[int, tuple[int, int, int]] = {}
    for ci, ids in enumerate(decoded.vertex_ids):
        for level, row in enumerate(ids):
            for order, vid in enumerate(row, start=1):
                where[vid] = (ci, level, order)

    candidates: set[_Candidate] = set()
    for loop in loops:
        placed = [where[v] for v in loop if v in where]
        for a in range(len(placed)):
            for b in range(a + 1, len(placed)):
                (ca, la, ia), (cb, lb, ib) = placed[a], placed[b]
                if ca != cb:
                    continue
                structure = decoded.components[ca]
                self_entries, between_entries = _structure_entry_sets(structure)
                if la == lb:
                    if ia == ib or frozenset((ia, ib)) in self_entries[la]:
                        continue
                    entries = set(self_entries[la]) | {frozenset((ia, ib))}
                    if _self_row_encodable(entries, structure.layer_size(la), config):
                        lo, hi = sorted((ia, ib))
                        candidates.add(_Candidate(ca, "self", la, lo, hi))
                elif abs(la - lb) == 1:
                    if la > lb:
                        level, i, j = la, ia, ib
                    else:
                        level, i, j = lb, ib, ia
                    if (i, j) in between_entries[level]:
                        continue
                    entries = set(between_entries[level]) | {(i, j)}
                    if _between_row_encodable(
                        entries, i, structure.layer_size(level - 1), config
                    ):
                        candidates.add(_Candidate(ca, "between", level, i, j))
    return sorted(candidates, key=lambda c: (c.component,) + c.sort_key())


def _apply_candidate(structure: ComponentStructure, cand: _Candidate) -> None:
    if cand.kind == "self":
        structure.self_entries[cand.layer].add(frozenset((cand.i, cand.j)))
    else:
        structure.between_entries[cand.layer].add((cand.i, cand.j))


def _remove_candidate(structure: ComponentStructure, cand: _Candidate) -> None:
    if cand.kind == "self":
        structure.self_entries[cand.layer].discard(frozenset((cand.i, cand.j)))
    else:
        structure.between_entries[cand.layer].discard((cand.i, cand.j))


def _all_faces(decoded: DecodedMesh, base: set[tuple[int, int, int]]):
    faces = dict.fromkeys(base)
    sets = {frozenset(f) for f in base}
    for structure, ids in zip(decoded.components, decoded.vertex_ids):
        for face in derive_faces(structure, ids):
            if frozenset(face) not in sets:
                sets.add(frozenset(face))
                faces[face] = None
    return list(faces)


def repair_holes(
    decoded: DecodedMesh, config: CodecConfig | None = None, max_entries: int = 64
) -> tuple[QuantizedMesh, HoleReport]:
    """Greedily add topology entries until no boundary edges remain.

    Each step tries every admissible missing entry between hole-loop
    vertices, keeps the one closing the most boundary edges (ties broken
    by lowest layer/row/column), and stops when no entry helps or the
    budget is exhausted.
    """
    config = config or CodecConfig()
    base_faces = {tuple(int(x) for x in f) for f in decoded.mesh.faces}
    faces = _all_faces(decoded, base_faces)
    before = len(boundary_edges(faces))
    loops0 = boundary_loops(faces)
    report = HoleReport(before, before, loops0)

    current = before
    for _ in range(max_entries):
        if current == 0:
            break
        loops = boundary_loops(faces)
        best: tuple[int, tuple, _Candidate] | None = None
        for cand in _enumerate_candidates(decoded, loops, config):
            structure = decoded.components[cand.component]
            _apply_candidate(structure, cand)
            trial = _all_faces(decoded, base_faces)
            _remove_candidate(structure, cand)
            if not _is_valid_topology(trial):
                continue
            reduction = current - len(boundary_edges(trial))
            if reduction <= 0:
                continue
            key = (-reduction, (cand.component,) + cand.sort_key())
            if best is None or key < best[1]:
                best = (reduction, key, cand)
        if best is None:
            break
        _, _, cand = best
        _apply_candidate(decoded.components[cand.component], cand)
        faces = _all_faces(decoded, base_faces)
        current = len(boundary_edges(faces))
        report.added_entries.append(
            {
                "component": cand.component,
                "kind": cand.kind,
                "layer": cand.layer,
                "i": cand.i,
                "j": cand.j,
            }
        )

    report.boundary_edges_after = current
    mesh = QuantizedMesh(
        decoded.mesh.vertices.copy(),
        np.array(sorted(faces), dtype=np.int64).reshape(-1, 3),
        resolution=decoded.mesh.resolution,
    )
    return mesh, report
