import csv
import io
import json

import pytest

from covertree_forensics.experiments import (BICHROMATIC_COLUMNS, TALL_COLUMNS,
                                             run_correctness_suite, run_dual_complexity,
                                             run_dual_self_neighbor, run_dualtree_counterexamples,
                                             run_insert_counterexample, run_nn_counterexample,
                                             run_scaling_sweep)
from covertree_forensics.graph import RegimeError


def test_insert_m11():
    r = run_insert_counterexample(11)
    assert r.measured["xi"] >= 119 and r.claimed_bound <= 92
    assert r.contradiction and r.expected and r.ok


def test_insert_m21():
    r = run_insert_counterexample(21)
    assert r.measured["xi"] >= 439 and r.claimed_bound <= 172 and r.contradiction


def test_insert_below_regime():
    with pytest.raises(RegimeError):
        run_insert_counterexample(10)


def test_nn_m11_and_m21():
    r = run_nn_counterexample(11)
    assert r.measured["xi"] >= 119 and r.claimed_bound <= 46 and r.contradiction
    r = run_nn_counterexample(21)
    assert r.measured["xi"] >= 439 and r.claimed_bound <= 86
    assert r.measured["max_candidate_set"] <= 2
    assert (r.measured["neighbor"], r.measured["neighbor_distance"]) == ("r", "1*2^0")
    assert r.ok


def test_dual_pair_at_m12():
    a, b = run_dualtree_counterexamples(12)
    assert a.measured["self_neighbors"] == a.measured["queries"] == 145
    assert b.lower_bound == 10296 and b.claimed_bound == 14400
    assert b.measured["reference_expansions"] >= 10296
    assert not b.contradiction and not b.expected and b.ok


def test_dual_self_m11_and_fixed_variant():
    r = run_dual_self_neighbor(11)
    assert r.measured["self_neighbors"] == 122 and r.ok
    r = run_dual_self_neighbor(11, exclude_self=True)
    assert r.measured["self_neighbors"] == 0 and r.checks["matches_brute_force"] and r.ok


def test_results_deterministic():
    a, b = run_insert_counterexample(11), run_insert_counterexample(11)
    da, db = a.to_dict(), b.to_dict()
    da.pop("runtime_ms"), db.pop("runtime_ms")
    assert da == db
    assert json.loads(a.to_json())["ok"] is True


def test_tall_sweep():
    text = run_scaling_sweep("tall", [11, 15, 21, 25])
    rows = list(csv.DictReader(io.StringIO(text)))
    assert list(rows[0]) == TALL_COLUMNS
    xis = [int(r["insert_xi"]) for r in rows]
    assert xis == sorted(xis)
    for r in rows:
        m = int(r["m"])
        assert int(r["explicit_depth"]) <= 2 * m + 1
        assert int(r["insert_xi"]) >= m * m - 2 and int(r["nn_xi"]) >= m * m - 2
    assert text == run_scaling_sweep("tall", [11, 15, 21, 25])


def test_empty_sweep_is_header_only():
    assert run_scaling_sweep("tall", []) == ",".join(TALL_COLUMNS) + "\n"
    assert run_scaling_sweep("bichromatic", []) == ",".join(BICHROMATIC_COLUMNS) + "\n"
    with pytest.raises(ValueError):
        run_scaling_sweep("flat", [])


def test_bichromatic_sweep_tracks_quartic_sum():
    rows = list(csv.DictReader(io.StringIO(run_scaling_sweep("bichromatic", [12, 14]))))
    for r in rows:
        m = int(r["m"])
        assert int(r["lower_bound"]) == (m * m) * (m * m - 1) // 2
        assert int(r["reference_expansions"]) >= int(r["lower_bound"])
        assert int(r["max_reference_set"]) <= 3


def test_correctness_suite_seed_42():
    report = run_correctness_suite(42, [50, 100, 200])
    assert report.passed, report.failures
    assert len(report.cases) == 12
    assert all(c.detail.startswith("seed=[42,") for c in report.cases)


def test_correctness_suite_degenerate_sizes():
    assert run_correctness_suite(5, [1, 2]).passed


@pytest.mark.parametrize("fault", ["covering", "separation", "root", "node"])
def test_correctness_suite_surfaces_faults(fault):
    report = run_correctness_suite(9, [40], inject_fault=fault)
    failed = {c.name for c in report.failures}
    assert "invariants" in failed
    inv = next(c for c in report.cases if c.name == "invariants")
    assert fault in inv.detail.split("violated=")[1].split()[0].split(",")
