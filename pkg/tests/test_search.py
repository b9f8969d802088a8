import random
import re
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covertree_forensics.graph import generate_tall_imbalanced
from covertree_forensics.metric import EuclideanMetric, LineMetric, brute_force_knn
from covertree_forensics.search import (DualTreeBlocks, DuplicatePointError, TraceCounters,
                                        build_tree, find_all_nn, format_level_log, insert,
                                        nn_search, replay_trace)
from covertree_forensics.tree import CoverTree, verify_invariants

GOLDEN = Path(__file__).resolve().parent / "golden"


def unit_square(seed, n):
    return EuclideanMetric(np.random.default_rng(seed).random((n, 2)))


def test_insert_into_empty_tree():
    c = TraceCounters()
    t = insert(CoverTree(), 3, LineMetric([0, 1, 2, 9]), c)
    assert (t.root, len(t), c.recursions) == (3, 1, 0)


def test_insert_rejects_duplicates():
    sp = LineMetric([0, 4, 4])
    t = build_tree(sp, [0, 1])
    with pytest.raises(DuplicatePointError, match="duplicate"):
        insert(t, 1, sp)
    with pytest.raises(DuplicatePointError, match="duplicate"):
        insert(t, 2, sp)


def test_insert_raises_root_level_for_far_points():
    sp = LineMetric([0, 1, 1000])
    t = build_tree(sp, [0, 1, 2])
    assert t.root_level == 10
    assert verify_invariants(t, sp) == []


@given(st.integers(0, 10_000), st.integers(1, 60))
@settings(max_examples=60, deadline=None)
def test_any_insertion_order_gives_valid_tree(seed, n):
    rng = random.Random(seed)
    sp = LineMetric(rng.sample(range(-5000, 5000), n))
    order = list(range(n))
    rng.shuffle(order)
    assert verify_invariants(build_tree(sp, order), sp) == []


def test_hundred_unit_square_points_valid():
    sp = unit_square(3, 100)
    assert verify_invariants(build_tree(sp, range(100)), sp) == []


def test_insert_counterexample_m21():
    ds = generate_tall_imbalanced(21)
    t = ds.tree.copy()
    c = TraceCounters.tracing()
    insert(t, ds.query_point, ds.space, c)
    assert c.recursions >= 439
    assert c.max_candidate_set <= 2
    assert [lv for lv, _ in c.per_level_log] == list(range(441, 0, -1))
    assert all(s == (0, lv) for lv, s in c.per_level_log)  # {r, p_i}
    assert (t.level[ds.query_point], t.parent[ds.query_point]) == (-1, 0)


def test_insert_keeps_tall_tree_valid(tall11):
    t = tall11.tree.copy()
    insert(t, tall11.query_point, tall11.space)
    assert verify_invariants(t, tall11.space) == []


def test_nn_counterexample_m21():
    ds = generate_tall_imbalanced(21)
    c = TraceCounters.tracing()
    ans = nn_search(ds.tree, ds.query_point, ds.space, c)
    assert ans.nearest == (0, 1)
    assert c.recursions >= 439 and c.max_candidate_set <= 2
    assert all(len(s) <= 2 for _, s in c.per_level_log)


@pytest.mark.parametrize("which, run", [("insert", "insert"), ("nn", "nn")])
def test_golden_traces_m11(tall11, which, run):
    c = TraceCounters.tracing()
    if run == "insert":
        insert(tall11.tree.copy(), tall11.query_point, tall11.space, c)
    else:
        nn_search(tall11.tree, tall11.query_point, tall11.space, c)
    cmp = replay_trace(format_level_log(c.per_level_log, tall11.space), GOLDEN / f"{which}_m11.txt")
    assert cmp.identical, "".join(cmp.diff)


def test_replay_empty_and_mismatch(tmp_path):
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    assert replay_trace("", empty).identical
    assert replay_trace([], empty).identical
    other = tmp_path / "one.txt"
    other.write_text("level 1 candidates r,p1\n")
    cmp = replay_trace(["level 1 candidates r,p2"], other)
    assert not cmp.identical
    assert any(line.startswith("+level 1 candidates r,p2") for line in cmp.diff)


def test_nn_single_point_and_empty():
    sp = LineMetric([5])
    assert nn_search(build_tree(sp, [0]), 0, sp).nearest == (0, 0)
    with pytest.raises(ValueError):
        nn_search(CoverTree(), 0, sp)


def test_nn_matches_brute_force_random():
    sp = EuclideanMetric(np.random.default_rng(11).random((250, 2)))
    R = list(range(200))
    t = build_tree(sp, R)
    for q in range(200, 250):
        assert nn_search(t, q, sp).nearest == brute_force_knn(sp, q, R).nearest


@given(st.integers(0, 10_000), st.integers(1, 50))
@settings(max_examples=40, deadline=None)
def test_nn_matches_brute_force_exact_line(seed, n):
    rng = random.Random(seed)
    sp = LineMetric(rng.sample(range(100_000), n + 10))
    R = list(range(n))
    t = build_tree(sp, R)
    for q in range(n, n + 10):
        assert nn_search(t, q, sp).nearest == brute_force_knn(sp, q, R).nearest


def test_nn_external_query_bichromatic(bichromatic12):
    ds = bichromatic12
    got = nn_search(ds.trees["reference"], ds.query_point, ds.space)
    assert got.nearest == brute_force_knn(ds.space, ds.query_point, ds.reference).nearest


def test_dual_self_neighbor_defect(tall11):
    ans = find_all_nn(tall11.tree, tall11.tree, tall11.space)
    assert len(ans) == 122
    assert all(a.nearest == (q, 0) for q, a in ans.items())


def test_dual_self_excluded_matches_brute_force(tall11):
    ans = find_all_nn(tall11.tree, tall11.tree, tall11.space, exclude_self=True)
    for q in tall11.reference:
        want = brute_force_knn(tall11.space, q, tall11.reference, exclude_self=True)
        assert ans[q].neighbors == want.neighbors


def test_dual_single_point():
    sp = LineMetric([3])
    t = build_tree(sp, [0])
    b = DualTreeBlocks()
    ans = find_all_nn(t, t, sp, b)
    assert ans[0].nearest == (0, 0)
    assert (b.final_candidates, b.reference_expansions) == (1, 0)
    assert find_all_nn(t, t, sp, exclude_self=True)[0].neighbors == []


def test_dual_bichromatic_m12(bichromatic12):
    ds = bichromatic12
    b = DualTreeBlocks.tracing()
    ans = find_all_nn(ds.trees["query"], ds.trees["reference"], ds.space, b)
    assert b.reference_expansions >= 10296
    assert b.reference_expansions == sum(b.per_query_reference_expansions.values())
    assert b.max_reference_set <= 3
    for q in ds.query:
        assert ans[q].nearest == brute_force_knn(ds.space, q, ds.reference).nearest
    pattern = re.compile(r"^\((final|reference|query), i=-?\d+, j=-?\d+, \|candidates\|=\d+\)$")
    assert all(pattern.match(line) for line in b.run_log)
    assert sum(line.startswith("(reference") for line in b.run_log) == b.reference_expansions


@pytest.mark.parametrize("seed", range(5))
def test_dual_random_bichromatic_and_self(seed):
    sp = unit_square(100 + seed, 180)
    R, Q = list(range(120)), list(range(120, 180))
    tr, tq = build_tree(sp, R), build_tree(sp, Q)
    ans = find_all_nn(tq, tr, sp)
    assert all(ans[q].nearest == brute_force_knn(sp, q, R).nearest for q in Q)
    ans = find_all_nn(tr, tr, sp, exclude_self=True)
    assert all(ans[q].neighbors == brute_force_knn(sp, q, R, exclude_self=True).neighbors for q in R)


def test_format_level_log():
    sp = LineMetric([0, 1], labels=["a", "b"])
    assert format_level_log([(3, (0, 1)), (2, (1,))], sp) == (
        "level 3 candidates a,b\nlevel 2 candidates b\n")
    assert format_level_log([], sp) == ""
