"""Half-edge connectivity structure and manifold validation."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .errors import NonManifoldError, OrientationError
from .mesh import QuantizedMesh

NO_TWIN = -1


@dataclass
class HalfEdgeMesh:
    """Triangle half-edge structure.

    Half-edge ``h`` of face ``f = h // 3`` at corner ``h % 3``.  ``next`` is
    implicit: ``next(h) = f*3 + (h%3 + 1) % 3``.  Boundary half-edges carry
    ``twin == NO_TWIN``.
    """

    mesh: QuantizedMesh
    origin: np.ndarray        # (H,) vertex id per half-edge
    dest: np.ndarray          # (H,)
    twin: np.ndarray          # (H,) half-edge id or NO_TWIN
    out_edges: dict[int, dict[int, int]] = field(repr=False, default_factory=dict)
    # out_edges[v][w] = half-edge id v->w

    @property
    def half_edge_count(self) -> int:
        return len(self.origin)

    def next(self, h: int) -> int:
        return (h - h % 3) + (h % 3 + 1) % 3

    def prev(self, h: int) -> int:
        return (h - h % 3) + (h % 3 + 2) % 3

    def face_of(self, h: int) -> int:
        return h // 3

    def rotate_ccw(self, h: int) -> int:
        """Next outgoing half-edge counterclockwise around origin(h), or NO_TWIN."""
        t = self.twin[self.prev(h)]
        return int(t)

    def boundary_count(self) -> int:
        return int((self.twin == NO_TWIN).sum())

    def boundary_start(self, v: int) -> int | None:
        """The outgoing boundary half-edge at v (start of the open fan), if any."""
        for w, h in self.out_edges.get(v, {}).items():
            if self.twin[h] == NO_TWIN:
                return h
        return None

    def neighbors_ccw(self, v: int, seed_neighbor: int | None = None) -> list[int]:
        """All neighbors of v in counterclockwise rotation order.

        For an interior vertex the closed fan is rotated to start at
        ``seed_neighbor`` (when given).  For a boundary vertex the walk starts
        at the boundary edge; if ``seed_neighbor`` is given the chain is
        rotated (with wrap) so that it comes first.
        """
        outgoing = self.out_edges.get(v)
        if not outgoing:
            return []
        start = self.boundary_start(v)
        boundary = start is not None
        if not boundary:
            if seed_neighbor is not None and seed_neighbor in outgoing:
                start = outgoing[seed_neighbor]
            else:
                start = min(outgoing.values())
        order: list[int] = []
        h = start
        while True:
            order.append(int(self.dest[h]))
            nxt = self.twin[self.prev(h)]
            if nxt == NO_TWIN:
                # open fan: the final neighbor is only reachable as the
                # origin of the incoming boundary half-edge
                order.append(int(self.origin[self.prev(h)]))
                break
            h = int(nxt)
            if h == start:
                break
        if boundary and seed_neighbor is not None and seed_neighbor in outgoing:
            k = order.index(seed_neighbor)
            order = order[k:] + order[:k]
        return order


@dataclass(frozen=True)
class ManifoldReport:
    non_manifold_edges: list[tuple[int, int]]
    non_manifold_vertices: list[int]

    @property
    def is_manifold(self) -> bool:
        return not self.non_manifold_edges and not self.non_manifold_vertices

    def to_dict(self) -> dict:
        return {
            "isManifold": self.is_manifold,
            "nonManifoldEdges": [list(e) for e in self.non_manifold_edges],
            "nonManifoldVertices": list(self.non_manifold_vertices),
        }


def _vertex_links(faces: np.ndarray) -> dict[int, list[tuple[int, int]]]:
    """For each vertex v, the neighbor pairs (a, b), one per incident face."""
    links: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for a, b, c in faces:
        a, b, c = int(a), int(b), int(c)
        links[a].append((b, c))
        links[b].append((c, a))
        links[c].append((a, b))
    return links


def vertex_graph_is_manifold(link_pairs: list[tuple[int, int]]) -> bool:
    """Check the per-vertex edge graph: all degrees <= 2 and one component."""
    degree: dict[int, int] = defaultdict(int)
    adj: dict[int, list[int]] = defaultdict(list)
    for a, b in link_pairs:
        degree[a] += 1
        degree[b] += 1
        adj[a].append(b)
        adj[b].append(a)
    if any(d > 2 for d in degree.values()):
        return False
    nodes = list(adj)
    if not nodes:
        return True
    seen = {nodes[0]}
    stack = [nodes[0]]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == len(nodes)


def validate_manifold(mesh: QuantizedMesh) -> ManifoldReport:
    """Report edges with >= 3 incident faces and vertices with branched or
    disconnected edge graphs."""
    edge_faces: dict[tuple[int, int], int] = defaultdict(int)
    for a, b, c in mesh.faces:
        a, b, c = int(a), int(b), int(c)
        for u, v in ((a, b), (b, c), (a, c)):
            edge_faces[(u, v) if u < v else (v, u)] += 1
    bad_edges = sorted(e for e, n in edge_faces.items() if n >= 3)
    bad_vertices = [
        v
        for v, pairs in sorted(_vertex_links(mesh.faces).items())
        if not vertex_graph_is_manifold(pairs)
    ]
    return ManifoldReport(bad_edges, bad_vertices)


def build_half_edge(mesh: QuantizedMesh) -> HalfEdgeMesh:
    """Build the half-edge structure; raises on non-manifold input.

    Additionally requires orientable (consistent) winding: every shared edge
    must be traversed in opposite directions by its two faces.
    """
    report = validate_manifold(mesh)
    if not report.is_manifold:
        raise NonManifoldError(
            f"{len(report.non_manifold_edges)} non-manifold edges, "
            f"{len(report.non_manifold_vertices)} non-manifold vertices"
        )
    faces = mesh.faces
    count = len(faces) * 3
    origin = np.empty(count, dtype=np.int64)
    dest = np.empty(count, dtype=np.int64)
    twin = np.full(count, NO_TWIN, dtype=np.int64)
    directed: dict[tuple[int, int], int] = {}
    for fi, (a, b, c) in enumerate(faces):
        corners = (int(a), int(b), int(c))
        for k in range(3):
            h = fi * 3 + k
            u, v = corners[k], corners[(k + 1) % 3]
            origin[h] = u
            dest[h] = v
            if (u, v) in directed:
                raise OrientationError(f"edge {u}->{v} traversed twice")
            directed[(u, v)] = h
    for (u, v), h in directed.items():
        t = directed.get((v, u))
        if t is not None:
            twin[h] = t
    out_edges: dict[int, dict[int, int]] = defaultdict(dict)
    for (u, v), h in directed.items():
        out_edges[u][v] = h
    return HalfEdgeMesh(mesh, origin, dest, twin, dict(out_edges))
