"""Vertex layering, in-layer ordering, and adjacency matrix construction."""

import numpy as np

import shapes
from silkmesh import CodecConfig, build_half_edge, normalize, quantize
from silkmesh.layering import (
    build_matrices,
    layer_component,
    layer_vertices,
    select_start_half_edge,
)


def prep(raw):
    return quantize(normalize(raw), 128)


def labeled(raw, config=None):
    mesh = prep(raw)
    he = build_half_edge(mesh)
    config = config or CodecConfig()
    return mesh, he, layer_component(he, set(range(mesh.vertex_count)), config)


def test_start_half_edge_min_yzx():
    mesh = prep(shapes.octahedron())
    he = build_half_edge(mesh)
    origin, dest = select_start_half_edge(he, set(range(mesh.vertex_count)))
    # origin is the unique vertex with the smallest y coordinate
    assert mesh.vertices[origin].tolist() == [64, 0, 64]
    # destination breaks ties by its own y-z-x key among origin's neighbors
    keys = sorted(
        (int(mesh.vertices[n][1]), int(mesh.vertices[n][2]), int(mesh.vertices[n][0]), n)
        for n in he.neighbors_ccw(origin)
    )
    assert dest == keys[0][3]


def test_octahedron_layer_widths():
    _, _, lab = labeled(shapes.octahedron())
    assert [len(layer) for layer in lab.layers] == [1, 4, 1]


def test_layer_of_is_bfs_distance():
    mesh, he, lab = labeled(shapes.icosphere(2))
    dist = layer_vertices(he, lab.layers[0][0], set(range(mesh.vertex_count)))
    assert lab.layer_of == dist
    for level, layer in enumerate(lab.layers):
        assert all(dist[v] == level for v in layer)


def test_order_of_is_one_based_per_layer():
    _, _, lab = labeled(shapes.icosphere(1))
    for layer in lab.layers:
        assert sorted(lab.order_of[v] for v in layer) == list(range(1, len(layer) + 1))


def test_layer_one_follows_ccw_ring():
    mesh, he, lab = labeled(shapes.octahedron())
    origin = lab.layers[0][0]
    ring = he.neighbors_ccw(origin, seed_neighbor=lab.start_half_edge[1])
    assert list(lab.layers[1]) == ring


def test_triangle_matrices():
    _, he, lab = labeled(shapes.triangle())
    self_mats, between_mats = build_matrices(he, lab)
    assert [len(layer) for layer in lab.layers] == [1, 2]
    assert self_mats[0].entries == frozenset()
    assert self_mats[1].entries == frozenset({frozenset({1, 2})})
    assert between_mats[0].layer == 1
    assert between_mats[0].entries == frozenset({(1, 1), (2, 1)})


def test_octahedron_self_layer_is_four_cycle():
    _, he, lab = labeled(shapes.octahedron())
    self_mats, between_mats = build_matrices(he, lab)
    assert self_mats[1].entries == frozenset(
        frozenset(p) for p in [(1, 2), (2, 3), (3, 4), (4, 1)]
    )
    # apex and nadir each connect to all four middle vertices
    assert between_mats[0].entries == frozenset({(1, 1), (2, 1), (3, 1), (4, 1)})
    assert between_mats[1].entries == frozenset({(1, 1), (1, 2), (1, 3), (1, 4)})


def test_every_edge_appears_exactly_once():
    for raw in [shapes.icosphere(2), shapes.torus(), shapes.fan()]:
        mesh, he, lab = labeled(raw)
        self_mats, between_mats = build_matrices(he, lab)
        count = sum(len(m.entries) for m in self_mats)
        count += sum(len(m.entries) for m in between_mats)
        edges = {
            tuple(sorted((int(he.origin[h]), int(he.dest[h]))))
            for h in range(he.half_edge_count)
        }
        assert count == len(edges)


def test_between_rows_reference_previous_layer_only():
    _, he, lab = labeled(shapes.icosphere(2))
    _, between_mats = build_matrices(he, lab)
    for mat in between_mats:
        assert mat.rows == len(lab.layers[mat.layer])
        assert mat.cols == len(lab.layers[mat.layer - 1])
        for i, j in mat.entries:
            assert 1 <= i <= mat.rows and 1 <= j <= mat.cols
        # every row vertex has at least one parent below
        assert {i for i, _ in mat.entries} == set(range(1, mat.rows + 1))


def test_labeling_deterministic():
    _, _, lab1 = labeled(shapes.bumpy_sphere(3))
    _, _, lab2 = labeled(shapes.bumpy_sphere(3))
    assert lab1.layers == lab2.layers
    assert lab1.start_half_edge == lab2.start_half_edge
