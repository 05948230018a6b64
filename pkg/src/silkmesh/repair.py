"""Non-manifold repair by per-vertex edge-graph partitioning.

Each vertex's incidence is viewed as an "edge graph": one node per neighbor
(a mesh edge at the vertex), one link per incident face.  A manifold vertex
has an edge graph that is a single cycle or chain.  Violating vertices are
partitioned: one cycle/chain of links is kept, every other connected group
of links is re-attached to a freshly registered duplicate vertex.  The kept
set is chosen by (in order): mesh-component cohesion, cycle before chain,
length, smallest node-id sequence.  Vertices are processed sequentially in
BFS order so that fixing one vertex can spare its neighbors.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field

import numpy as np

from .errors import SilkmeshError
from .halfedge import validate_manifold, vertex_graph_is_manifold
from .mesh import QuantizedMesh

# capacity above which exhaustive cycle/chain enumeration falls back to greedy
EXHAUSTIVE_LINK_LIMIT = 24


@dataclass(frozen=True)
class EdgeGraph:
    """Per-vertex incidence graph: nodes are neighbor ids, links are faces."""

    reference_vertex: int
    nodes: tuple[int, ...]
    links: tuple[tuple[int, int, int], ...]  # (node a, node b, face index)

    def degree(self, node: int) -> int:
        return sum(1 for a, b, _ in self.links if node in (a, b))

    @property
    def is_manifold(self) -> bool:
        return vertex_graph_is_manifold([(a, b) for a, b, _ in self.links])


@dataclass(frozen=True)
class PartitionPlan:
    kept_nodes: tuple[int, ...]           # node sequence of the kept cycle/chain
    kept_links: frozenset[int]            # indexes into EdgeGraph.links
    kept_is_cycle: bool
    detached_groups: tuple[tuple[int, ...], ...]  # link-index groups


@dataclass
class RepairLog:
    processed_vertices: list[int] = field(default_factory=list)
    duplicates_created: list[tuple[int, int]] = field(default_factory=list)
    faces_rewired: int = 0

    def to_dict(self) -> dict:
        return {
            "processedVertices": list(self.processed_vertices),
            "duplicatesCreated": [list(d) for d in self.duplicates_created],
            "facesRewired": self.faces_rewired,
        }


def build_edge_graph(faces_at: list[tuple[int, tuple[int, int, int]]], v: int) -> EdgeGraph:
    """Edge graph of v given its incident faces as (face index, face) pairs."""
    if not faces_at:
        raise SilkmeshError(f"vertex {v} has no incident face")
    links = []
    nodes: set[int] = set()
    for fi, (a, b, c) in faces_at:
        others = [x for x in (a, b, c) if x != v]
        if len(others) != 2:
            raise SilkmeshError(f"face {fi} does not contain vertex {v} exactly once")
        links.append((others[0], others[1], fi))
        nodes.update(others)
    return EdgeGraph(v, tuple(sorted(nodes)), tuple(links))


def edge_graph_for_vertex(mesh: QuantizedMesh, v: int) -> EdgeGraph:
    faces_at = [
        (fi, (int(a), int(b), int(c)))
        for fi, (a, b, c) in enumerate(mesh.faces)
        if v in (int(a), int(b), int(c))
    ]
    return build_edge_graph(faces_at, v)


def _candidate_chains_and_cycles(graph: EdgeGraph):
    """Enumerate node-simple chains and cycles as (node sequence, link set, is_cycle).

    Falls back to a greedy longest extension for very large graphs.
    """
    adj: dict[int, list[tuple[int, int]]] = defaultdict(list)  # node -> (other, link idx)
    for li, (a, b, _) in enumerate(graph.links):
        adj[a].append((b, li))
        adj[b].append((a, li))

    results: list[tuple[tuple[int, ...], frozenset[int], bool]] = []
    seen: set[tuple] = set()

    def emit(seq: list[int], links: list[int], is_cycle: bool) -> None:
        if not links:
            return
        if is_cycle:
            # canonicalize rotation + direction
            n = len(seq)
            best = None
            for start in range(n):
                for step in (1, -1):
                    rot = tuple(seq[(start + step * k) % n] for k in range(n))
                    if best is None or rot < best:
                        best = rot
            key = ("c", best, frozenset(links))
        else:
            fwd = tuple(seq)
            rev = tuple(reversed(seq))
            key = ("p", min(fwd, rev), frozenset(links))
        if key not in seen:
            seen.add(key)
            canon = key[1]
            results.append((canon, frozenset(links), is_cycle))

    if len(graph.links) <= EXHAUSTIVE_LINK_LIMIT:
        def dfs(seq: list[int], links: list[int], used_nodes: set[int]) -> None:
            emit(seq, links, False)
            tail = seq[-1]
            for other, li in adj[tail]:
                if li in links:
                    continue
                if other == seq[0] and len(seq) >= 2:
                    emit(seq, links + [li], True)
                if other not in used_nodes:
                    used_nodes.add(other)
                    dfs(seq + [other], links + [li], used_nodes)
                    used_nodes.remove(other)

        for start in sorted(adj):
            dfs([start], [], {start})
    else:
        # greedy: grow the longest path from each node, close to a cycle if possible
        for start in sorted(adj):
            seq, links, used = [start], [], {start}
            while True:
                tail = seq[-1]
                ext = [
                    (other, li)
                    for other, li in sorted(adj[tail])
                    if li not in links and other not in used
                ]
                if not ext:
                    break
                other, li = ext[0]
                seq.append(other)
                links.append(li)
                used.add(other)
            closing = [
                li for other, li in adj[seq[-1]] if other == seq[0] and li not in links
            ]
            if closing and len(seq) >= 2:
                emit(seq, links + [closing[0]], True)
            emit(seq, links, False)
    return results


def partition_edge_graph(
    graph: EdgeGraph, node_labels: dict[int, int | None]
) -> PartitionPlan:
    """Choose the kept cycle/chain by the rule order and group the rest.

    ``node_labels`` maps a node (mesh vertex id) to its mesh connected
    component label, or None for non-manifold vertices (which carry a
    special label excluded from cohesion scoring).
    """
    candidates = _candidate_chains_and_cycles(graph)
    if not candidates:
        raise SilkmeshError("edge graph has no links")

    def score(seq: tuple[int, ...]) -> int:
        counts: dict[int, int] = defaultdict(int)
        for node in set(seq):
            label = node_labels.get(node)
            if label is not None:
                counts[label] += 1
        return max(counts.values(), default=0)

    def objective(cand):
        seq, links, is_cycle = cand
        return (score(seq), 1 if is_cycle else 0, len(links), tuple(-x for x in seq))

    best_seq, best_links, best_is_cycle = max(candidates, key=objective)

    # group residual links by connectivity
    residual = [li for li in range(len(graph.links)) if li not in best_links]
    parent = {li: li for li in residual}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    node_to_links: dict[int, list[int]] = defaultdict(list)
    for li in residual:
        a, b, _ = graph.links[li]
        node_to_links[a].append(li)
        node_to_links[b].append(li)
    for links_here in node_to_links.values():
        for other in links_here[1:]:
            ra, rb = find(links_here[0]), find(other)
            if ra != rb:
                parent[rb] = ra
    groups: dict[int, list[int]] = defaultdict(list)
    for li in residual:
        groups[find(li)].append(li)
    # deterministic group order: by smallest (node pair, face) of the group
    ordered = sorted(
        (tuple(sorted(g)) for g in groups.values()),
        key=lambda g: min((graph.links[li][:2], graph.links[li][2]) for li in g),
    )
    return PartitionPlan(best_seq, frozenset(best_links), best_is_cycle, tuple(ordered))


class _MeshState:
    """Mutable face/incidence state while repair runs."""

    def __init__(self, mesh: QuantizedMesh):
        self.vertices: list[tuple[int, int, int]] = [tuple(map(int, v)) for v in mesh.vertices]
        self.faces: list[list[int]] = [[int(a), int(b), int(c)] for a, b, c in mesh.faces]
        self.incident: dict[int, set[int]] = defaultdict(set)
        for fi, face in enumerate(self.faces):
            for v in face:
                self.incident[v].add(fi)

    def edge_graph(self, v: int) -> EdgeGraph:
        faces_at = [(fi, tuple(self.faces[fi])) for fi in sorted(self.incident[v])]
        return build_edge_graph(faces_at, v)

    def is_manifold_vertex(self, v: int) -> bool:
        pairs = []
        for fi in self.incident[v]:
            others = [x for x in self.faces[fi] if x != v]
            pairs.append((others[0], others[1]))
        return vertex_graph_is_manifold(pairs)

    def component_labels(self) -> dict[int, int | None]:
        """Labels over manifold vertices only; non-manifold vertices get None.

        Connectivity runs along mesh edges whose endpoints are both manifold.
        """
        manifold = {
            v: self.is_manifold_vertex(v) for v in self.incident if self.incident[v]
        }
        parent = {v: v for v, ok in manifold.items() if ok}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for face in self.faces:
            for i in range(3):
                u, w = face[i], face[(i + 1) % 3]
                if manifold.get(u) and manifold.get(w):
                    ru, rw = find(u), find(w)
                    if ru != rw:
                        parent[max(ru, rw)] = min(ru, rw)
        labels: dict[int, int | None] = {}
        index: dict[int, int] = {}
        for v in sorted(manifold):
            if manifold[v]:
                r = find(v)
                if r not in index:
                    index[r] = len(index)
                labels[v] = index[r]
            else:
                labels[v] = None
        return labels


def repair_non_manifold(mesh: QuantizedMesh) -> tuple[QuantizedMesh, RepairLog]:
    """Split non-manifold vertices until the whole mesh is manifold.

    Coordinates are preserved (duplicates share their original's position);
    the face count is unchanged and faces are only re-indexed.
    """
    log = RepairLog()
    state = _MeshState(mesh)
    seeds = sorted(
        v for v in state.incident if state.incident[v] and not state.is_manifold_vertex(v)
    )
    if not seeds:
        return mesh, log

    queue: deque[int] = deque(seeds)
    safety = 0
    limit = 10 * (len(state.vertices) + len(state.faces)) + 1000
    while queue:
        safety += 1
        if safety > limit:
            raise SilkmeshError("repair did not converge")
        v = queue.popleft()
        if not state.incident[v] or state.is_manifold_vertex(v):
            continue
        graph = state.edge_graph(v)
        labels = state.component_labels()
        plan = partition_edge_graph(graph, {n: labels.get(n) for n in graph.nodes})
        log.processed_vertices.append(v)
        affected: set[int] = set()
        for group in plan.detached_groups:
            new_id = len(state.vertices)
            state.vertices.append(state.vertices[v])
            log.duplicates_created.append((v, new_id))
            for li in group:
                fi = graph.links[li][2]
                face = state.faces[fi]
                face[face.index(v)] = new_id
                state.incident[v].discard(fi)
                state.incident[new_id].add(fi)
                log.faces_rewired += 1
                affected.update(x for x in face if x != new_id)
            affected.add(new_id)
        # re-examine changed neighbors before the remaining seeds
        changed = sorted(
            u
            for u in affected
            if state.incident[u] and not state.is_manifold_vertex(u)
        )
        queue.extendleft(reversed(changed))

    repaired = QuantizedMesh(
        np.array(state.vertices, dtype=np.int64),
        np.array(state.faces, dtype=np.int64),
        resolution=mesh.resolution,
        transform=mesh.transform,
        merged_vertices=mesh.merged_vertices,
        removed_faces=mesh.removed_faces,
    )
    report = validate_manifold(repaired)
    if not report.is_manifold:
        raise SilkmeshError("repair left non-manifold structure (internal error)")
    return repaired, log
