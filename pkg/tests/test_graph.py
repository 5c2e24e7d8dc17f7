import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opinion_shift.errors import ParseError, ValidationError
from opinion_shift.graph import (LeaderConfig, Model, WeightedDigraph, as_kappa, build_equivalent,
                                 complete_graph, gadget_graph, is_strongly_connected,
                                 is_vertex_cover, load_edge_list, path_graph, petersen_graph,
                                 write_edge_list)

from conftest import random_digraph


def test_load_path3_bidirectional():
    g = load_edge_list("0 1\n1 2\n1 0\n2 1")
    assert g.n == 3
    assert g.m == 4
    assert g.is_symmetric()


def test_parallel_edges_are_summed():
    g = load_edge_list("0 1 2\n0 1 3")
    assert g.m == 1
    assert g.weight(0, 1) == 5.0


def test_dangling_sink_not_strongly_connected():
    g = load_edge_list("a b\nb a\nb c")
    assert not is_strongly_connected(g)


def test_dedupe_keeps_first_weight():
    g = load_edge_list("0 1\n0 1\n1 0", dedupe=True)
    assert g.weight(0, 1) == 1.0


def test_comments_and_labels():
    g = load_edge_list("# header\nalice bob 2.5  # trailing\n\nbob carol\n", undirected=True)
    assert g.labels == ("alice", "bob", "carol")
    assert g.weight(g.index("bob"), g.index("alice")) == 2.5
    assert is_strongly_connected(g)


@pytest.mark.parametrize("text, line", [("0 1\n0 1 2 3", 2), ("0 1\n1\n", 2), ("0 1 x", 1)])
def test_malformed_lines_report_line_number(text, line):
    with pytest.raises(ParseError) as info:
        load_edge_list(text)
    assert info.value.line_number == line


def test_nonpositive_weight_rejected():
    with pytest.raises(ValidationError, match="non-positive"):
        load_edge_list("0 1 0")


def test_self_loop_rejected_with_label():
    with pytest.raises(ValidationError, match="'x'"):
        load_edge_list("x x")


def test_edge_list_round_trip():
    g = load_edge_list("a b 0.1\nb c 3\nc a 1e-3\n")
    assert load_edge_list(write_edge_list(g)) == g


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5),
                          st.floats(0.01, 10, allow_nan=False)), min_size=1, max_size=30))
def test_merge_preserves_total_weight(edges):
    edges = [(u, v, w) for u, v, w in edges if u != v]
    if not edges:
        return
    g = WeightedDigraph(6, edges)
    assert g.total_weight() == pytest.approx(sum(w for _, _, w in edges), rel=1e-12)
    pairs = {(u, v) for u, v, _ in edges}
    assert g.m == len(pairs)
    for u, v in pairs:
        expected = sum(w for a, b, w in edges if (a, b) == (u, v))
        assert g.weight(u, v) == pytest.approx(expected, rel=1e-12)


def test_neighbors_and_laplacian():
    g = WeightedDigraph(3, [(0, 1, 2.0), (0, 2, 1.0), (2, 0, 4.0)])
    assert g.out_neighbors(0) == [(1, 2.0), (2, 1.0)]
    assert g.in_neighbors(0) == [(2, 4.0)]
    lap = g.laplacian()
    np.testing.assert_allclose(lap.sum(axis=1), 0.0)
    np.testing.assert_allclose(np.diag(lap), [3.0, 0.0, 4.0])


def test_strong_connectivity_examples():
    assert is_strongly_connected(path_graph(3))
    assert is_strongly_connected(petersen_graph())
    assert not is_strongly_connected(WeightedDigraph(3, [(0, 1, 1), (1, 0, 1), (1, 2, 1)]))


def test_kappa_normalization():
    np.testing.assert_array_equal(as_kappa(2.0, 3), [2.0, 2.0, 2.0])
    np.testing.assert_array_equal(as_kappa({1: 5.0}, 3), [1.0, 5.0, 1.0])
    with pytest.raises(ValidationError):
        as_kappa([1.0, -1.0, 1.0], 3)
    with pytest.raises(ValidationError):
        as_kappa([1.0, 1.0], 3)


def test_leader_config_invariants():
    with pytest.raises(ValidationError, match="nonempty"):
        LeaderConfig(frozenset(), frozenset({1}))
    with pytest.raises(ValidationError, match="overlap"):
        LeaderConfig({0, 1}, {1})
    with pytest.raises(ValidationError):
        LeaderConfig.for_graph(path_graph(3), {0}, {7})
    cfg = LeaderConfig.for_graph(path_graph(4), {0}, {3}, "influenced", 2.0)
    assert cfg.model is Model.INFLUENCED
    assert cfg.followers(4) == [1, 2]


# -- leader-equivalent graphs --------------------------------------------


def test_contraction_follows_summation_rule():
    # Two party-0 leaders u, v and two party-1 leaders i, j around followers a, b.
    labels = ["u", "v", "i", "j", "a", "b"]
    u, v, i, j, a, b = range(6)
    edges = [(a, u, 1), (a, v, 2), (a, b, 1), (b, a, 1), (b, i, 3), (b, j, 1),
             (u, a, 1), (v, u, 1), (i, j, 1), (j, b, 2)]
    g = WeightedDigraph(6, edges, labels)
    eq = build_equivalent(g, LeaderConfig.for_graph(g, {u, v}, {i, j}))
    ga, gb = eq.origin_map[a], eq.origin_map[b]
    assert eq.graph.weight(ga, eq.s0_id) == 3.0
    assert eq.graph.weight(gb, eq.s1_id) == 4.0
    assert eq.graph.weight(ga, gb) == 1.0
    assert eq.graph.weight(gb, ga) == 1.0
    assert eq.graph.weight(eq.s1_id, gb) == 2.0
    # Edges inside a contracted party disappear.
    assert eq.graph.weight(eq.s0_id, eq.s0_id) == 0.0
    assert eq.graph.n == 4
    assert is_strongly_connected(eq.graph)


def test_singleton_leaders_give_isomorphic_graph():
    g = path_graph(3)
    eq = build_equivalent(g, LeaderConfig.for_graph(g, {0}, {2}))
    perm = [eq.origin_map[v] for v in range(3)]
    relabeled = WeightedDigraph(3, [(perm[u], perm[v], w) for u, v, w in g.edges()])
    assert relabeled == eq.graph


def test_augmentation_two_cycle():
    g = WeightedDigraph.from_undirected(2, [(0, 1)])
    eq = build_equivalent(g, LeaderConfig.for_graph(g, {0}, {1}, "influenced", 1.0))
    assert eq.graph.n == 4
    assert (eq.s0_id, eq.s1_id) == (2, 3)
    for leader, virtual in ((0, 2), (1, 3)):
        assert eq.graph.weight(leader, virtual) == 1.0
        assert eq.graph.weight(virtual, leader) == 1.0


def test_augmentation_uses_per_node_kappa(rng):
    g = random_digraph(rng, 7)
    kappa = rng.uniform(0.5, 3.0, 7)
    eq = build_equivalent(g, LeaderConfig.for_graph(g, {0, 1}, {4}, "influenced", kappa))
    for u, virtual in ((0, eq.s0_id), (1, eq.s0_id), (4, eq.s1_id)):
        assert eq.graph.weight(u, virtual) == pytest.approx(kappa[u])
        assert eq.graph.weight(virtual, u) == pytest.approx(kappa[u])
    assert is_strongly_connected(eq.graph)


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("model", ["absolute", "influenced"])
def test_equivalent_graph_strongly_connected(seed, model):
    r = np.random.default_rng(seed)
    g = random_digraph(r, 9, density=0.15)
    nodes = r.permutation(9)
    cfg = LeaderConfig.for_graph(g, set(nodes[:2].tolist()), set(nodes[2:4].tolist()), model)
    assert is_strongly_connected(build_equivalent(g, cfg).graph)


def test_equivalent_graph_needs_both_parties():
    g = path_graph(3)
    with pytest.raises(ValidationError):
        build_equivalent(g, LeaderConfig.for_graph(g, {0}, set()))


# -- gadget ------------------------------------------------------------


def test_gadget_structure():
    g, center = gadget_graph(petersen_graph())
    assert center == 10
    assert g.n == 11
    assert all(g.weight(center, u) == 3.0 and g.weight(u, center) == 3.0 for u in range(10))
    assert g.is_symmetric()


def test_gadget_rejects_non_cubic():
    with pytest.raises(ValidationError, match="3-regular"):
        gadget_graph(path_graph(4))


def test_petersen_six_covers_are_complements_of_independent_sets():
    pet = petersen_graph()
    adjacent = {(u, v) for u, v, _ in pet.edges()}
    independent4 = [c for c in itertools.combinations(range(10), 4)
                    if not any((u, v) in adjacent for u, v in itertools.combinations(c, 2))]
    covers6 = [c for c in itertools.combinations(range(10), 6) if is_vertex_cover(pet, c)]
    assert sorted(tuple(sorted(set(range(10)) - set(c))) for c in covers6) == independent4
    assert len(covers6) == 5
    assert not any(is_vertex_cover(pet, c) for c in itertools.combinations(range(10), 5))
    assert is_vertex_cover(complete_graph(4), {0, 1, 2})
