"""Graph constructors, the lattice builder, boundary surgery, serialization."""

from __future__ import annotations

import math

import pytest

from volumelab import (
    BoundaryCondition,
    InvalidSpecError,
    LatticeSpec,
    WeightedGraph,
    apply_boundary,
    build_lattice,
    complete_graph,
    from_edge_list_text,
    named_graph,
    small_graph_catalog,
    susceptibility_constant,
    to_edge_list_text,
)


def _degrees(g: WeightedGraph) -> list[int]:
    deg = [0] * g.n_vertices
    for a, b in g.edges:
        deg[a] += 1
        deg[b] += 1
    return deg


def test_catalog_is_small_connected_and_uniquely_named():
    graphs = small_graph_catalog()
    names = [g.name for g in graphs]
    assert len(set(names)) == len(graphs)
    assert {"single-edge", "path-3", "triangle", "parallel-pair"} <= set(names)
    for g in graphs:
        assert g.n_vertices <= 4
        assert g.n_edges <= 5
        if g.n_vertices > 1:
            assert (g.distances_from(0) >= 0).all()


def test_catalog_contains_a_parallel_pair_multigraph():
    g = named_graph("parallel-pair")
    assert g.edges == ((0, 1), (0, 1))


def test_named_graph_rejects_unknown_names():
    with pytest.raises(InvalidSpecError):
        named_graph("dodecahedron")


def test_square_torus_is_four_regular():
    g = build_lattice(LatticeSpec(dimension=2, lengths=(4, 4), wrap=True))
    assert g.n_vertices == 16
    assert g.n_edges == 32
    assert set(_degrees(g)) == {4}
    assert g.vertex_transitive
    # antipodal point sits at L/2 + L/2 hops
    assert g.distances_from(0).max() == 4


def test_open_box_loses_wrap_edges_and_transitivity():
    g = build_lattice(LatticeSpec(dimension=2, lengths=(3, 3), wrap=False))
    assert g.n_vertices == 9
    assert g.n_edges == 12
    assert sorted(_degrees(g))[:4] == [2, 2, 2, 2]
    assert not g.vertex_transitive


def test_mixed_wrap_counts_edges_per_axis():
    g = build_lattice(LatticeSpec(dimension=2, lengths=(3, 4), wrap=(True, False)))
    # wrapped axis: 3 edges per line x 4 lines; open axis: 3 edges x 3 lines
    assert g.n_edges == 21


def test_one_dimensional_ring():
    g = build_lattice(LatticeSpec(dimension=1, lengths=(5,), wrap=True))
    assert (g.n_vertices, g.n_edges) == (5, 5)
    assert g.distances_from(0).max() == 2


def test_lattice_coupling_propagates_to_every_edge():
    g = build_lattice(LatticeSpec(dimension=2, lengths=(4, 4), wrap=True, coupling=2.5))
    assert set(g.couplings) == {2.5}


def test_free_boundary_is_the_induced_subgraph():
    g = named_graph("path-4")
    sub = apply_boundary(g, BoundaryCondition("free"), retained=[1, 2])
    assert sub.n_vertices == 2
    assert sub.edges == ((0, 1),)


def test_wired_boundary_merges_the_outside_into_a_hub():
    g = named_graph("path-4")
    w = apply_boundary(g, BoundaryCondition("wired"), retained=[1, 2])
    # endpoints 0 and 3 collapse into one hub, turning the path into a cycle
    assert w.n_vertices == 3
    assert sorted(tuple(sorted(e)) for e in w.edges) == [(0, 1), (0, 2), (1, 2)]


def test_boundary_condition_rejects_unknown_kind():
    with pytest.raises(InvalidSpecError):
        BoundaryCondition("periodic")


def test_susceptibility_constant_unit_couplings():
    g = named_graph("triangle")
    assert susceptibility_constant(g, 1.0) == pytest.approx(math.expm1(1.0))


def test_susceptibility_constant_scales_with_coupling():
    g = build_lattice(LatticeSpec(dimension=1, lengths=(3,), wrap=False, coupling=2.0))
    # per-edge value is expm1(beta J) / J, maximized over edges
    assert susceptibility_constant(g, 0.5) == pytest.approx(math.expm1(1.0) / 2.0)


def test_complete_graph_edge_count():
    g = complete_graph(6)
    assert g.n_vertices == 6
    assert g.n_edges == 15


def test_edge_list_text_round_trip():
    g = named_graph("path-4")
    back = from_edge_list_text(to_edge_list_text(g))
    assert back.n_vertices == g.n_vertices
    assert back.edges == g.edges
    assert back.couplings == g.couplings
    assert back.name == g.name


def test_weighted_graph_validates_edge_indices():
    with pytest.raises(InvalidSpecError):
        WeightedGraph(n_vertices=2, edges=((0, 2),), couplings=(1.0,))


def test_weighted_graph_rejects_nonpositive_couplings():
    with pytest.raises(InvalidSpecError):
        WeightedGraph(n_vertices=2, edges=((0, 1),), couplings=(0.0,))
