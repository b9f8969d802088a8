import itertools
from pathlib import Path

import pytest

from covertree_forensics.dataset import read_dataset
from covertree_forensics.graph import (Edge, MetricMultigraph, OnEdge, RegimeError, UnreachableError,
                                       Vertex, GraphMetric, closed_form_distance,
                                       generate_bichromatic, generate_tall_imbalanced,
                                       shortest_path_distance, tall_imbalanced_tree)
from covertree_forensics.metric import audit_metric
from covertree_forensics.numeric import Dyadic, pow2
from covertree_forensics.tree import CoverTree, verify_invariants

FIXTURES = Path(__file__).resolve().parent / "fixtures"


def enumerate_paths(g: MetricMultigraph, a, b):
    """Oracle: minimum over every simple route in the graph with a and b spliced in.

    Each point in the interior of an edge becomes a node splitting that edge;
    parallel edges between the same pair collapse to their shortest one, then
    every simple node sequence from a to b is tried.
    """
    a, b = g.canonical(a), g.canonical(b)
    if a == b:
        return Dyadic(0)
    pieces = {e.id: [(Dyadic(0), Vertex(e.u)), (e.length, Vertex(e.v))] for e in g.edges.values()}
    for pt in (a, b):
        if isinstance(pt, OnEdge):
            pieces[pt.edge].append((pt.offset, pt))
    hop = {}
    for pts in pieces.values():
        pts.sort(key=lambda t: t[0])
        for (o1, x), (o2, y) in zip(pts, pts[1:]):
            w = o2 - o1
            for key in ((x, y), (y, x)):
                if key not in hop or w < hop[key]:
                    hop[key] = w
    nodes = {x for x, _ in hop}
    mids = [x for x in nodes if x not in (a, b)]
    best = None
    for k in range(len(mids) + 1):
        for seq in itertools.permutations(mids, k):
            route = (a, *seq, b)
            if all(pair in hop for pair in zip(route, route[1:])):
                total = sum((hop[pair] for pair in zip(route, route[1:])), Dyadic(0))
                if best is None or total < best:
                    best = total
    if best is None:
        raise UnreachableError("unreachable")
    return best


def test_fixture_table_matches_closed_form_and_graph(tall11):
    table = read_dataset(FIXTURES / "tall_m11_distances.txt").space
    sp = tall11.space
    assert table.labels == sp.labels
    n = len(sp)
    for a in range(n):
        for b in range(a + 1, n):
            want = table.dist(a, b)
            assert closed_form_distance("tall", 11, a, b) == want, (a, b)
            assert sp.dist(a, b) == want, (a, b)


def test_path_enumeration_agrees_with_fixture(tall11):
    table = read_dataset(FIXTURES / "tall_m11_distances.txt").space
    locs = tall11.space.locations
    picks = [0, 1, 2, 10, 11, 12, 22, 23, 60, 66, 120, 121, 122]
    for a, b in itertools.combinations(picks, 2):
        assert enumerate_paths(tall11.graph, locs[a], locs[b]) == table.dist(a, b), (a, b)


def test_tall_named_distances(tall11):
    sp, q, r = tall11.space, tall11.query_point, tall11.root
    assert sp.dist(q, r) == 1
    assert sp.dist(q, 5) == pow2(6)
    for i in range(1, 122):
        assert sp.dist(q, i) == pow2(i + 1)
        assert sp.dist(r, i) == (pow2(i + 1) if i % 11 == 0 else pow2(i + 1) + 1)


def test_same_group_gap_is_sum_of_powers(tall11):
    sp = tall11.space
    for j, i in [(1, 2), (1, 10), (12, 22), (45, 53), (111, 121)]:
        expected = sum((pow2(t) for t in range(j + 1, i + 1)), Dyadic(0))
        assert sp.dist(i, j) == expected == pow2(i + 1) - pow2(j + 1)


def test_prescribed_tall_trees_are_valid(tall11):
    assert verify_invariants(tall11.tree, tall11.space) == []
    t = tall11.tree
    assert t.root_level == 122
    assert sorted(t.level.values()) == list(range(1, 122))  # one new point per level


def test_generators_reject_small_m():
    with pytest.raises(RegimeError):
        generate_tall_imbalanced(10)
    with pytest.raises(RegimeError):
        generate_bichromatic(11)


def test_tall_sizes(tall11):
    assert len(tall11.reference) == 122
    assert len(tall11.space) == 123
    assert tall11.space.label(tall11.query_point) == "q"


def test_bichromatic_closed_form_all_pairs(bichromatic12):
    sp = bichromatic12.space
    n = len(sp)
    assert n == 2 * 144 + 2
    for a in range(n):
        for b in range(a + 1, n):
            assert closed_form_distance("bichromatic", 12, a, b) == sp.dist(a, b), (a, b)


def test_bichromatic_cross_distances(bichromatic12):
    sp = bichromatic12.space
    assert sp.dist(0, bichromatic12.query_point) == 1
    for i, j in [(1, 1), (3, 40), (12, 12), (144, 1), (77, 100)]:
        assert sp.dist(144 + i, j) == pow2(i + 1) + pow2(j + 1)


def test_bichromatic_trees_valid(bichromatic12):
    for name in ("reference", "query"):
        assert verify_invariants(bichromatic12.trees[name], bichromatic12.space) == []
    assert len(bichromatic12.reference) == len(bichromatic12.query) == 145


def test_audits_clean(tall11, bichromatic12):
    assert audit_metric(tall11.space) == []
    assert audit_metric(bichromatic12.space) == []


def _train_line(h_exp):
    g = MetricMultigraph(["r", "q"], [Edge("e", "r", "q", pow2(6)), Edge("h", "r", "q", pow2(h_exp)),
                                      Edge("g", "r", "q", Dyadic(1))])
    locs = [Vertex("r"), OnEdge("h", pow2(h_exp) - pow2(h_exp - 2)), OnEdge("h", pow2(h_exp - 1)),
            OnEdge("e", pow2(6) - pow2(4)), OnEdge("e", pow2(5))]
    sp = GraphMetric(g, locs, ["r", "p1", "p2", "p3", "p4"])
    t = CoverTree.from_parents(0, 6, {1: 1, 2: 2, 3: 3, 4: 4}, {1: 2, 2: 0, 3: 4, 4: 0})
    return sp, t


def test_short_train_line_with_h_eight_breaks_separation():
    sp, t = _train_line(3)
    bad = verify_invariants(t, sp)
    assert bad and {v.condition for v in bad} == {"separation"}
    assert {(v.witness[0], frozenset(v.witness[1:])) for v in bad} == {
        (2, frozenset({0, 2})), (1, frozenset({1, 2}))}


def test_short_train_line_with_h_sixteen_is_valid():
    sp, t = _train_line(4)
    assert verify_invariants(t, sp) == []


def test_shortest_path_basics():
    g = MetricMultigraph(["a", "b", "c"], [Edge("x", "a", "b", Dyadic(4)), Edge("y", "b", "c", Dyadic(2))])
    assert shortest_path_distance(g, OnEdge("x", Dyadic(3)), OnEdge("x", Dyadic(3))) == 0
    assert shortest_path_distance(g, OnEdge("x", Dyadic(1)), OnEdge("y", Dyadic(1))) == 4
    assert shortest_path_distance(g, OnEdge("x", Dyadic(0)), Vertex("a")) == 0
    lonely = MetricMultigraph(["a", "b", "z"], [Edge("x", "a", "b", Dyadic(4))])
    with pytest.raises(UnreachableError, match="unreachable"):
        shortest_path_distance(lonely, Vertex("a"), Vertex("z"))


def test_multigraph_validation():
    with pytest.raises(ValueError):
        MetricMultigraph(["a"], [Edge("x", "a", "b", Dyadic(1))])
    with pytest.raises(ValueError):
        MetricMultigraph(["a", "b"], [Edge("x", "a", "b", Dyadic(0))])
    g = MetricMultigraph(["a", "b"], [Edge("x", "a", "b", Dyadic(1))])
    with pytest.raises(ValueError):
        g.canonical(OnEdge("x", Dyadic(2)))


def test_small_tall_tree_shape():
    t = tall_imbalanced_tree(3)
    assert t.parent == {1: 2, 2: 3, 3: 0, 4: 5, 5: 6, 6: 0, 7: 8, 8: 9, 9: 0}
