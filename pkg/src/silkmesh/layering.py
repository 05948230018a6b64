"""Vertex layering and canonical in-layer ordering.

Every vertex of a connected component receives a unique (layer, order)
coordinate.  The layer is the unweighted graph distance from the start
half-edge's origin; the in-layer order follows the counterclockwise
neighbor enumeration of the previous layer's vertices, seeded at the start
half-edge's destination.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .config import CodecConfig
from .errors import EncodingCapacityExceeded
from .halfedge import HalfEdgeMesh
from .mesh import QuantizedMesh


@dataclass(frozen=True)
class LayeredLabeling:
    start_half_edge: tuple[int, int]            # (origin, destination) vertex ids
    layers: tuple[tuple[int, ...], ...]          # ordered vertex ids per layer
    layer_of: dict[int, int] = field(hash=False, default_factory=dict)
    order_of: dict[int, int] = field(hash=False, default_factory=dict)  # 1-based

    def to_dict(self) -> dict:
        return {
            "startHalfEdge": list(self.start_half_edge),
            "layers": [list(layer) for layer in self.layers],
        }


@dataclass(frozen=True)
class SelfLayerMatrix:
    layer: int
    size: int
    entries: frozenset[frozenset[int]]  # unordered 1-based order pairs


@dataclass(frozen=True)
class BetweenLayerMatrix:
    layer: int       # L >= 1; rows index layer L, columns layer L-1
    rows: int
    cols: int
    entries: frozenset[tuple[int, int]]  # 1-based (row, col)

    def row(self, i: int) -> set[int]:
        return {j for r, j in self.entries if r == i}


def half_edge_sort_key(he: HalfEdgeMesh, h: int) -> tuple:
    """y-z-x coordinate key for start half-edge selection."""
    o = he.mesh.vertices[he.origin[h]]
    d = he.mesh.vertices[he.dest[h]]
    return (
        int(o[1]), int(o[2]), int(o[0]),
        int(d[1]), int(d[2]), int(d[0]),
        int(he.origin[h]), int(he.dest[h]),
    )


def select_start_half_edge(he: HalfEdgeMesh, component_vertices: set[int]) -> tuple[int, int]:
    """Smallest half-edge of the component in y-z-x order."""
    best = None
    best_key = None
    for h in range(he.half_edge_count):
        if int(he.origin[h]) not in component_vertices:
            continue
        key = half_edge_sort_key(he, h)
        if best_key is None or key < best_key:
            best_key = key
            best = h
    if best is None:
        raise ValueError("component has no half-edges")
    return int(he.origin[best]), int(he.dest[best])


def layer_vertices(he: HalfEdgeMesh, origin: int, component_vertices: set[int]) -> dict[int, int]:
    """Unweighted graph distance from the origin over mesh edges."""
    dist = {origin: 0}
    queue = deque([origin])
    adjacency = _adjacency(he, component_vertices)
    while queue:
        u = queue.popleft()
        for w in adjacency[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def _adjacency(he: HalfEdgeMesh, component_vertices: set[int]) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {v: set() for v in component_vertices}
    for h in range(he.half_edge_count):
        u, w = int(he.origin[h]), int(he.dest[h])
        if u in adj:
            adj[u].add(w)
            adj[w].add(u)
    return adj


def sort_layers(
    he: HalfEdgeMesh,
    start: tuple[int, int],
    distances: dict[int, int],
    max_layer_width: int,
) -> LayeredLabeling:
    """Assign in-layer orders by counterclockwise first-visit enumeration.

    For each layer-(L-1) vertex in its order, its unvisited layer-L
    neighbors are appended in counterclockwise rotation order.  The rotation
    is seeded at the vertex's own BFS predecessor (at the start half-edge's
    destination for the origin); boundary fans start at the boundary edge.
    """
    origin, destination = start
    depth = max(distances.values())
    layers: list[list[int]] = [[] for _ in range(depth + 1)]
    layers[0] = [origin]
    predecessor: dict[int, int | None] = {origin: None}
    visited = {origin}

    for level in range(1, depth + 1):
        for parent in layers[level - 1]:
            if parent == origin:
                seed = destination
            else:
                pred = predecessor[parent]
                seed = pred if not _is_boundary(he, parent) else None
            for neighbor in he.neighbors_ccw(parent, seed_neighbor=seed):
                if neighbor in visited or distances.get(neighbor) != level:
                    continue
                visited.add(neighbor)
                predecessor[neighbor] = parent
                layers[level].append(neighbor)
        if len(layers[level]) > max_layer_width:
            raise EncodingCapacityExceeded(
                f"layer {level} has {len(layers[level])} vertices "
                f"(capacity {max_layer_width})"
            )
    missing = set(distances) - visited
    if missing:
        raise RuntimeError(f"vertices never ordered: {sorted(missing)[:5]}...")

    layer_of = {v: d for v, d in distances.items()}
    order_of: dict[int, int] = {}
    for layer in layers:
        for i, v in enumerate(layer, start=1):
            order_of[v] = i
    return LayeredLabeling(
        start_half_edge=(origin, destination),
        layers=tuple(tuple(layer) for layer in layers),
        layer_of=layer_of,
        order_of=order_of,
    )


def _is_boundary(he: HalfEdgeMesh, v: int) -> bool:
    return he.boundary_start(v) is not None


def build_matrices(
    he: HalfEdgeMesh, labeling: LayeredLabeling
) -> tuple[list[SelfLayerMatrix], list[BetweenLayerMatrix]]:
    """Split every component edge into exactly one self- or between-layer entry."""
    layer_of = labeling.layer_of
    order_of = labeling.order_of
    depth = len(labeling.layers) - 1
    self_entries: list[set[frozenset[int]]] = [set() for _ in range(depth + 1)]
    between_entries: list[set[tuple[int, int]]] = [set() for _ in range(depth + 1)]

    seen: set[tuple[int, int]] = set()
    for h in range(he.half_edge_count):
        u, w = int(he.origin[h]), int(he.dest[h])
        if u not in layer_of or w not in layer_of:
            continue
        key = (u, w) if u < w else (w, u)
        if key in seen:
            continue
        seen.add(key)
        lu, lw = layer_of[u], layer_of[w]
        if lu == lw:
            self_entries[lu].add(frozenset((order_of[u], order_of[w])))
        else:
            if lu < lw:
                u, w = w, u
                lu, lw = lw, lu
            between_entries[lu].add((order_of[u], order_of[w]))

    self_mats = [
        SelfLayerMatrix(layer=l, size=len(labeling.layers[l]), entries=frozenset(self_entries[l]))
        for l in range(depth + 1)
    ]
    between_mats = [
        BetweenLayerMatrix(
            layer=l,
            rows=len(labeling.layers[l]),
            cols=len(labeling.layers[l - 1]) if l >= 1 else 0,
            entries=frozenset(between_entries[l]),
        )
        for l in range(1, depth + 1)
    ]
    return self_mats, between_mats


def layer_component(
    he: HalfEdgeMesh, component_vertices: set[int], config: CodecConfig
) -> LayeredLabeling:
    start = select_start_half_edge(he, component_vertices)
    distances = layer_vertices(he, start[0], component_vertices)
    return sort_layers(he, start, distances, config.max_layer_width)
