"""Counterexample experiments, the scaling sweep and the random correctness suite.

Every result is deterministic given (experiment, m) apart from ``runtime_ms``.
``lower_bound`` is the count the construction forces, ``claimed_bound`` the
upper bound under test with its explicit constants. ``expected`` is whether
``lower_bound > claimed_bound``, i.e. whether a contradiction is guaranteed at
this m, and ``ok`` says the run behaved exactly as predicted.

Sweep CSV columns
-----------------
tall: ``m, n_points`` (|R|), ``explicit_depth`` (D), ``depth_limit`` (2m+1),
``insert_xi, insert_bound`` (4 D), ``nn_xi, nn_max_candidates, nn_bound``
(D max|Q_i|), ``lower_bound`` (m^2 - 2).

bichromatic: ``m, n_points`` (|R|), ``reference_expansions, lower_bound``
(sum of u - 2 over u = 2 .. m^2 + 1), ``claimed_bound`` ((2m+1) 4 m^2),
``max_reference_set, contradiction``.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .graph import generate_bichromatic, generate_tall_imbalanced
from .metric import EuclideanMetric, brute_force_knn
from .numeric import ceil_log2
from .search import (DualTreeBlocks, TraceCounters, build_tree, find_all_nn, format_level_log,
                     insert, nn_search)
from .tree import explicit_depth, verify_invariants

__all__ = [
    "ExperimentResult",
    "run_insert_counterexample",
    "run_nn_counterexample",
    "run_dual_self_neighbor",
    "run_dual_complexity",
    "run_dualtree_counterexamples",
    "run_scaling_sweep",
    "CaseResult",
    "CorrectnessReport",
    "run_correctness_suite",
    "TALL_COLUMNS",
    "BICHROMATIC_COLUMNS",
]


@dataclass
class ExperimentResult:
    experiment: str
    m: int
    measured: dict
    lower_bound: int
    claimed_bound: int
    contradiction: bool
    expected: bool
    checks: dict[str, bool] = field(default_factory=dict)
    runtime_ms: float = 0.0
    trace: str | None = None

    @property
    def ok(self) -> bool:
        return self.contradiction == self.expected and all(self.checks.values())

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("trace")
        out["ok"] = self.ok
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _elapsed(t0: float) -> float:
    return round((time.perf_counter() - t0) * 1000, 3)


def run_insert_counterexample(m: int, trace: bool = False) -> ExperimentResult:
    t0 = time.perf_counter()
    ds = generate_tall_imbalanced(m)
    tree = ds.tree.copy()
    depth = explicit_depth(tree)
    c = TraceCounters.tracing() if trace else TraceCounters()
    insert(tree, ds.query_point, ds.space, c)
    ms = _elapsed(t0)
    xi = c.recursions
    lower, bound = m * m - 2, 4 * depth
    return ExperimentResult(
        "insert", m,
        {"xi": xi, "explicit_depth": depth, "max_candidate_set": c.max_candidate_set,
         "distance_evals": c.distance_evals,
         "inserted_level": tree.level[ds.query_point],
         "inserted_parent": ds.space.label(tree.parent[ds.query_point])},
        lower, bound, xi > bound, lower > bound,
        {"xi_at_least_lower_bound": xi >= lower, "depth_within_2m_plus_1": depth <= 2 * m + 1},
        ms, format_level_log(c.per_level_log, ds.space) if trace else None)


def run_nn_counterexample(m: int, trace: bool = False) -> ExperimentResult:
    t0 = time.perf_counter()
    ds = generate_tall_imbalanced(m)
    depth = explicit_depth(ds.tree)
    c = TraceCounters.tracing() if trace else TraceCounters()
    ans = nn_search(ds.tree, ds.query_point, ds.space, c)
    ms = _elapsed(t0)
    nb, dist = ans.nearest
    xi, width = c.recursions, c.max_candidate_set
    lower, bound = m * m - 2, depth * width
    return ExperimentResult(
        "nn", m,
        {"xi": xi, "explicit_depth": depth, "max_candidate_set": width,
         "distance_evals": c.distance_evals, "neighbor": ds.space.label(nb),
         "neighbor_distance": str(dist)},
        # the worst case the bound allows is D * 2 because |Q_i| <= 2 here
        lower, bound, xi > bound, lower > depth * 2,
        {"xi_at_least_lower_bound": xi >= lower, "candidates_at_most_2": width <= 2,
         "neighbor_is_r_at_1": nb == ds.root and dist == 1},
        ms, format_level_log(c.per_level_log, ds.space) if trace else None)


def run_dual_self_neighbor(m: int, trace: bool = False, exclude_self: bool = False) -> ExperimentResult:
    """Q = R on the tall family: the unmodified recursion answers every query with itself.

    With ``exclude_self`` the fixed recursion runs instead; then no answer may be
    trivial and every answer must match the brute-force scan without self.
    """
    t0 = time.perf_counter()
    ds = generate_tall_imbalanced(m)
    b = DualTreeBlocks.tracing() if trace else DualTreeBlocks()
    ans = find_all_nn(ds.tree, ds.tree, ds.space, b, exclude_self=exclude_self)
    ms = _elapsed(t0)
    n = len(ds.reference)
    trivial = sum(1 for q, a in ans.items() if a.nearest == (q, 0))
    checks = {"all_queries_answered": len(ans) == n}
    if exclude_self:
        checks["matches_brute_force"] = all(
            ans[q].neighbors == brute_force_knn(ds.space, q, ds.reference, exclude_self=True).neighbors
            for q in ds.reference)
    else:
        checks["every_answer_trivial"] = trivial == n
    return ExperimentResult(
        "dual-self-excluded" if exclude_self else "dual-self", m,
        {"queries": n, "self_neighbors": trivial, "answered": len(ans),
         "reference_expansions": b.reference_expansions, "distance_evals": b.distance_evals},
        # a correct all-nearest-neighbor routine gives no trivial answers
        0 if exclude_self else n, 0, trivial > 0, not exclude_self, checks,
        ms, "\n".join(b.run_log) + "\n" if trace else None)


def _dual_lower_bound(m: int) -> int:
    n = m * m
    return n * (n - 1) // 2  # sum of u - 2 for u = 2 .. m^2 + 1


def run_dual_complexity(m: int, trace: bool = False, check_oracle: bool = True) -> ExperimentResult:
    """Bichromatic family: count reference expansions against (2m+1) * 4 * m^2."""
    t0 = time.perf_counter()
    ds = generate_bichromatic(m)
    b = DualTreeBlocks.tracing() if trace else DualTreeBlocks()
    ans = find_all_nn(ds.trees["query"], ds.trees["reference"], ds.space, b)
    ms = _elapsed(t0)
    xi = b.reference_expansions
    lower, bound = _dual_lower_bound(m), (2 * m + 1) * 4 * m * m
    checks = {"xi_at_least_lower_bound": xi >= lower,
              "reference_set_at_most_3": b.max_reference_set <= 3,
              "all_queries_answered": len(ans) == len(ds.query)}
    if check_oracle:
        sp = ds.space
        checks["matches_brute_force"] = all(
            ans[q].nearest[1] == brute_force_knn(sp, q, ds.reference).nearest[1] for q in ds.query)
    measured = {"reference_expansions": xi, "query_expansions": b.query_expansions,
                "final_candidates": b.final_candidates,
                "trivial_reference_steps": b.trivial_reference_steps,
                "max_reference_set": b.max_reference_set,
                "max_reference_children": b.max_reference_children,
                "distance_evals": b.distance_evals}
    measured.update({f"kappa_{k}": v for k, v in b.kappa.items()})
    return ExperimentResult(
        "dual-complexity", m, measured, lower, bound, xi > bound, lower > bound, checks, ms,
        "\n".join(b.run_log) + "\n" if trace else None)


def run_dualtree_counterexamples(m: int) -> tuple[ExperimentResult, ExperimentResult]:
    """Self-neighbor run on the tall family and complexity run on the bichromatic one."""
    return run_dual_self_neighbor(m), run_dual_complexity(m)


TALL_COLUMNS = ["m", "n_points", "explicit_depth", "depth_limit", "insert_xi", "insert_bound",
                "nn_xi", "nn_max_candidates", "nn_bound", "lower_bound"]
BICHROMATIC_COLUMNS = ["m", "n_points", "reference_expansions", "lower_bound", "claimed_bound",
                       "max_reference_set", "contradiction"]


def _sweep_row(family: str, m: int) -> dict:
    if family == "tall":
        ins, nn = run_insert_counterexample(m), run_nn_counterexample(m)
        return {"m": m, "n_points": m * m + 1,
                "explicit_depth": ins.measured["explicit_depth"], "depth_limit": 2 * m + 1,
                "insert_xi": ins.measured["xi"], "insert_bound": ins.claimed_bound,
                "nn_xi": nn.measured["xi"], "nn_max_candidates": nn.measured["max_candidate_set"],
                "nn_bound": nn.claimed_bound, "lower_bound": ins.lower_bound}
    r = run_dual_complexity(m, check_oracle=False)
    return {"m": m, "n_points": m * m + 1,
            "reference_expansions": r.measured["reference_expansions"],
            "lower_bound": r.lower_bound, "claimed_bound": r.claimed_bound,
            "max_reference_set": r.measured["max_reference_set"],
            "contradiction": int(r.contradiction)}


def run_scaling_sweep(family: str, m_list: Sequence[int]) -> str:
    if family not in ("tall", "bichromatic"):
        raise ValueError(f"unknown family {family!r}")
    cols = TALL_COLUMNS if family == "tall" else BICHROMATIC_COLUMNS
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for m in m_list:
        w.writerow(_sweep_row(family, m))
    return buf.getvalue()


@dataclass
class CaseResult:
    name: str
    seed: int
    size: int
    passed: bool
    detail: str = ""


@dataclass
class CorrectnessReport:
    seed: int
    cases: list[CaseResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    @property
    def failures(self) -> list[CaseResult]:
        return [c for c in self.cases if not c.passed]

    def to_json(self) -> str:
        return json.dumps({"seed": self.seed, "passed": self.passed,
                           "cases": [asdict(c) for c in self.cases]}, indent=2)


def _inject_fault(tree, space, kind: str) -> None:
    """Corrupt a built tree so that ``kind`` is among the reported violations."""
    if len(tree) < 2:
        raise ValueError("fault injection needs at least two points")
    p = min(tree.level, key=lambda x: (tree.level[x], x))
    if kind == "covering":
        # sink p far below the reach of its parent
        tree.level[p] = ceil_log2(space.dist(p, tree.parent[p])) - 3
    elif kind == "separation":
        pts = list(tree)
        a, b = min(((a, b) for k, a in enumerate(pts) for b in pts[k + 1:]),
                   key=lambda ab: space.dist(*ab))
        lv = ceil_log2(space.dist(a, b))
        for x in (a, b):
            if x != tree.root:
                tree.level[x] = lv
    elif kind == "root":
        tree.level[p] = tree.root_level
    elif kind == "node":
        tree.parent[p] = p
    else:
        raise ValueError(f"unknown fault {kind!r}")
    tree.reindex()


def run_correctness_suite(seed: int, sizes: Sequence[int], n_queries: int = 20,
                          inject_fault: str | None = None) -> CorrectnessReport:
    """Random unit-square data per size; each case names the seed pair that replays it."""
    cases: list[CaseResult] = []
    for size in sizes:
        rng = np.random.default_rng([seed, size])
        pts = rng.random((size, 2))
        qs = rng.random((n_queries, 2))
        Q2 = rng.random((max(1, size // 2), 2))
        space = EuclideanMetric(np.vstack([pts, qs, Q2]))
        R = list(rng.permutation(size).tolist())
        extra = list(range(size, size + n_queries))
        Qb = list(range(size + n_queries, len(space)))
        tag = f"seed=[{seed},{size}]"

        tree = build_tree(space, R)
        if inject_fault is not None:
            _inject_fault(tree, space, inject_fault)
        bad = verify_invariants(tree, space)
        if bad:
            kinds = ",".join(sorted({v.condition for v in bad}))
            detail = f"{tag} violated={kinds} first={bad[:3]}"
        else:
            detail = tag
        cases.append(CaseResult("invariants", seed, size, not bad, detail))

        miss = [q for q in extra
                if nn_search(tree, q, space).nearest != brute_force_knn(space, q, R).nearest]
        cases.append(CaseResult("nn_search", seed, size, not miss,
                                f"{tag} mismatched queries {miss}" if miss else tag))

        ans = find_all_nn(tree, tree, space, exclude_self=True)
        miss = []
        for q in R:
            want = brute_force_knn(space, q, R, exclude_self=True).neighbors if size > 1 else []
            if ans.get(q) is None or ans[q].neighbors != want:
                miss.append(q)
        cases.append(CaseResult("dual_self_excluded", seed, size, not miss,
                                f"{tag} mismatched queries {miss}" if miss else tag))

        qtree = build_tree(space, Qb)
        ans = find_all_nn(qtree, tree, space)
        miss = [q for q in Qb if ans.get(q) is None
                or ans[q].nearest != brute_force_knn(space, q, R).nearest]
        cases.append(CaseResult("dual_bichromatic", seed, size, not miss,
                                f"{tag} mismatched queries {miss}" if miss else tag))
    return CorrectnessReport(seed, cases)
