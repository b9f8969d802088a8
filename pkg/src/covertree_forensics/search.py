"""Instrumented cover-tree algorithms: Insert, single-tree NN search and the
dual-tree all-nearest-neighbors recursion.

The implicit tree has infinitely many levels. All three algorithms jump over
levels where no candidate has a non-trivial child (the candidate sets only
shrink there, by filters that can be applied in one step), so the counters
report exactly the executed, branching iterations.
"""

from __future__ import annotations

import difflib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .metric import MetricSpace, NeighborAnswer
from .numeric import ceil_log2
from .tree import CoverTree

__all__ = [
    "TraceCounters",
    "DualTreeBlocks",
    "DuplicatePointError",
    "insert",
    "build_tree",
    "nn_search",
    "find_all_nn",
    "format_level_log",
    "TraceComparison",
    "replay_trace",
]


@dataclass
class TraceCounters:
    recursions: int = 0
    max_candidate_set: int = 0
    candidate_children_max: int = 0
    distance_evals: int = 0
    # (level, candidate ids) per executed level, descending; None disables logging
    per_level_log: list[tuple[int, tuple[int, ...]]] | None = None

    @classmethod
    def tracing(cls) -> "TraceCounters":
        return cls(per_level_log=[])


@dataclass
class DualTreeBlocks:
    final_candidates: int = 0
    reference_expansions: int = 0
    query_expansions: int = 0
    per_query_reference_expansions: dict[int, int] = field(default_factory=dict)
    trivial_reference_steps: int = 0
    max_reference_set: int = 0  # max |R_i|
    max_reference_children: int = 0  # max |C(R_i)|
    distance_evals: int = 0
    # max run of one kind of descend uninterrupted by the other, along any recursion path
    kappa: dict[str, int] = field(default_factory=lambda: {
        "query_between_reference": 0,
        "query_trailing": 0,
        "reference_between_query": 0,
        "reference_trailing": 0,
    })
    run_log: list[str] | None = None

    @classmethod
    def tracing(cls) -> "DualTreeBlocks":
        return cls(run_log=[])


class DuplicatePointError(ValueError):
    pass


class _Dist:
    """Memoized distances from one point, counted on first evaluation."""

    __slots__ = ("space", "p", "cache", "counter")

    def __init__(self, space: MetricSpace, p: int, counter) -> None:
        self.space, self.p, self.cache, self.counter = space, p, {}, counter

    def __call__(self, x: int):
        d = self.cache.get(x)
        if d is None:
            d = self.space.dist(self.p, x)
            self.cache[x] = d
            self.counter.distance_evals += 1
        return d


def _branch_frontier(t: CoverTree, S: Sequence[int], i: int) -> int | None:
    best = None
    for x in S:
        b = t.next_branch_level(x, i)
        if b is not None and (best is None or b > best):
            best = b
    return best


def insert(t: CoverTree, p: int, space: MetricSpace,
           counters: TraceCounters | None = None) -> CoverTree:
    """Insert ``p`` into ``t`` in place and return ``t``.

    Runs the recursive Insert from the root level with ``Q = {root}``: at
    level ``i`` the candidates grow to their children, the search gives up
    once ``d(p, Q) > 2^i``, otherwise descends with ``{q : d(p, q) <= 2^i}``.
    On the way back up, the first level ``i`` with some ``q`` in ``Q_i``
    within ``2^i`` adopts ``p`` at level ``i - 1`` (smallest eligible id).
    A point farther than ``2^root_level`` from the root raises the root level
    first.
    """
    c = counters if counters is not None else TraceCounters()
    if t.root is None:
        t.root = p
        t.root_level = 0
        t.reindex()
        return t
    if p in t:
        raise DuplicatePointError(f"duplicate: point {p} already in tree")
    d = _Dist(space, p, c)
    pw = space.pow2
    d_root = d(t.root)
    if not d_root:
        raise DuplicatePointError(f"duplicate: point {p} coincides with {t.root}")
    if len(t) == 1:
        t.root_level = ceil_log2(d_root)
    elif d_root > pw(t.root_level):
        t.root_level = ceil_log2(d_root)

    frames: dict[int, list[int]] = {}
    i, Qi = t.root_level, [t.root]
    while True:
        frames[i] = Qi
        kids = [k for q in Qi for k in t.children_at(q, i)]
        Q = Qi + kids
        dmin = min(d(x) for x in Q)
        if not dmin:
            dup = min(x for x in Q if not d(x))
            raise DuplicatePointError(f"duplicate: point {p} coincides with {dup}")
        if dmin > pw(i):
            fail = i
            break
        S = sorted(x for x in Q if d(x) <= pw(i))
        if kids:
            c.recursions += 1
            c.max_candidate_set = max(c.max_candidate_set, len(Qi))
            c.candidate_children_max = max(c.candidate_children_max, len(Q))
            if c.per_level_log is not None:
                c.per_level_log.append((i - 1, tuple(S)))
        s = i - 1
        j = _branch_frontier(t, S, s)
        # below s nothing branches until j, so the descent fails at the
        # largest k with 2^k < dmin unless j comes first
        kstar = ceil_log2(dmin) - 1
        if j is None or kstar > j:
            if kstar < s:
                frames[kstar + 1] = S if kstar + 1 == s else [x for x in S if d(x) <= pw(kstar + 2)]
            fail = kstar
            break
        if j < s:
            frames[j + 1] = S if j + 1 == s else [x for x in S if d(x) <= pw(j + 2)]
            i, Qi = j, [x for x in S if d(x) <= pw(j + 1)]
        else:
            i, Qi = s, S

    lv = fail + 1
    while True:
        eligible = [x for x in frames[lv] if d(x) <= pw(lv)]
        if eligible:
            t.add(p, lv - 1, min(eligible))
            return t
        lv += 1


def build_tree(space: MetricSpace, points: Sequence[int],
               counters: TraceCounters | None = None) -> CoverTree:
    t = CoverTree()
    for p in points:
        insert(t, p, space, counters)
    return t


def nn_search(t: CoverTree, q: int, space: MetricSpace,
              counters: TraceCounters | None = None) -> NeighborAnswer:
    """Nearest neighbor of ``q`` by descending the tree with
    ``Q_{i-1} = {x in Children(Q_i) : d(q, x) <= d(q, Children(Q_i)) + 2^i}``.
    """
    if t.root is None:
        raise ValueError("empty tree")
    c = counters if counters is not None else TraceCounters()
    d = _Dist(space, q, c)
    pw = space.pow2
    i, Qi = t.root_level, [t.root]
    while True:
        j = _branch_frontier(t, Qi, i)
        if j is None:
            break
        if j < i:
            dmin = min(d(x) for x in Qi)
            Qi = [x for x in Qi if d(x) <= dmin + pw(j + 1)]
            i = j
            continue
        kids = [k for x in Qi for k in t.children_at(x, i)]
        Q = Qi + kids
        dmin = min(d(x) for x in Q)
        c.recursions += 1
        c.max_candidate_set = max(c.max_candidate_set, len(Qi))
        c.candidate_children_max = max(c.candidate_children_max, len(Q))
        Qi = sorted(x for x in Q if d(x) <= dmin + pw(i))
        if c.per_level_log is not None:
            c.per_level_log.append((i - 1, tuple(Qi)))
        i -= 1
    c.max_candidate_set = max(c.max_candidate_set, len(Qi))
    best = min(Qi, key=lambda x: (d(x), x))
    return NeighborAnswer(q, [(best, d(best))])


def find_all_nn(tq: CoverTree, tr: CoverTree, space: MetricSpace,
                blocks: DualTreeBlocks | None = None,
                exclude_self: bool = False) -> dict[int, NeighborAnswer]:
    """Dual-tree all-nearest-neighbors over query tree ``tq`` and reference tree ``tr``.

    Each call ``(q_j, R_i)`` either finishes (reference side exhausted: every
    query below ``q_j`` takes its argmin over ``R_i``), expands the reference
    side when ``j < i`` with
    ``R_{i-1} = {r in C(R_i) : d(q_j, r) <= d(q_j, C(R_i)) + 2^i + 2^(j+2)}``,
    or expands the query node into its children.

    With ``exclude_self`` a query never takes itself as a candidate. Without
    it and with ``Q = R`` every point comes back as its own neighbor.
    """
    b = blocks if blocks is not None else DualTreeBlocks()
    out: dict[int, NeighborAnswer] = {}
    if tq.root is None or tr.root is None:
        return out
    pw = space.pow2
    dists: dict[int, _Dist] = {}

    def dist_from(q: int) -> _Dist:
        f = dists.get(q)
        if f is None:
            f = dists[q] = _Dist(space, q, b)
        return f

    def logline(block: str, i: int, j: int, size: int) -> None:
        if b.run_log is not None:
            b.run_log.append(f"({block}, i={i}, j={j}, |candidates|={size})")

    kappa = b.kappa
    # work item: query point, its level, reference set, reference level,
    # current run of query descends, current run of reference descends,
    # whether a reference / query descend happened earlier on this path
    stack = [(tq.root, tq.root_level, [tr.root], tr.root_level, 0, 0, False, False)]
    b.max_reference_set = max(b.max_reference_set, 1)
    while stack:
        q, j, R, i, qrun, rrun, seen_r, seen_q = stack.pop()
        d = dist_from(q)
        while True:
            nr = _branch_frontier(tr, R, i)
            if nr is None:
                b.final_candidates += 1
                logline("final", i, j, len(R))
                for x in tq.descendants(q, j):
                    dx = dist_from(x)
                    cands = [r for r in R if not (exclude_self and r == x)]
                    if cands:
                        best = min(cands, key=lambda r: (dx(r), r))
                        out[x] = NeighborAnswer(x, [(best, dx(best))])
                    else:
                        out[x] = NeighborAnswer(x, [])
                kappa["query_trailing"] = max(kappa["query_trailing"], qrun)
                kappa["reference_trailing"] = max(kappa["reference_trailing"], rrun)
                break
            if j < i:
                if nr < i:
                    # trivial reference levels i .. max(nr, j) + 1: filters only
                    stop = max(nr, j)
                    elig = [r for r in R if not (exclude_self and r == q)]
                    if elig:
                        dmin = min(d(r) for r in elig)
                        R = [r for r in R if d(r) <= dmin + pw(stop + 1) + pw(j + 2)]
                    b.trivial_reference_steps += i - stop
                    i = stop
                    continue
                kids = [k for r in R for k in tr.children_at(r, i)]
                C = R + kids
                elig = [r for r in C if not (exclude_self and r == q)]
                if elig:
                    thr = min(d(r) for r in elig) + pw(i) + pw(j + 2)
                    R = sorted(r for r in C if d(r) <= thr)
                else:
                    R = sorted(C)
                b.reference_expansions += 1
                b.per_query_reference_expansions[q] = b.per_query_reference_expansions.get(q, 0) + 1
                b.max_reference_children = max(b.max_reference_children, len(C))
                b.max_reference_set = max(b.max_reference_set, len(R))
                logline("reference", i, j, len(C))
                if seen_r:
                    kappa["query_between_reference"] = max(kappa["query_between_reference"], qrun)
                qrun, seen_r = 0, True
                rrun += 1
                i -= 1
                continue
            nq = tq.next_branch_level(q, j)
            if nq is None or nq < i:
                # trivial query levels down to i - 1
                j = i - 1
                continue
            if nq < j:
                j = nq
            kids = tq.children_at(q, j)
            b.query_expansions += 1
            logline("query", i, j, len(kids) + 1)
            if seen_q:
                kappa["reference_between_query"] = max(kappa["reference_between_query"], rrun)
            for child in reversed([q] + kids):
                stack.append((child, j - 1, R, i, qrun + 1, 0, seen_r, True))
            break
    return out


def format_level_log(log: Sequence[tuple[int, Sequence[int]]], space: MetricSpace) -> str:
    """One ``level <i> candidates <label,...>`` line per entry."""
    return "".join(
        f"level {lv} candidates {','.join(space.label(x) for x in pts)}\n" for lv, pts in log)


@dataclass
class TraceComparison:
    identical: bool
    diff: list[str]


def replay_trace(recorded: str | Sequence[str], golden: str | Path) -> TraceComparison:
    """Compare a recorded log against a golden file, byte for byte."""
    if not isinstance(recorded, str):
        recorded = "".join(line if line.endswith("\n") else line + "\n" for line in recorded)
    golden_text = Path(golden).read_text()
    if recorded == golden_text:
        return TraceComparison(True, [])
    diff = list(difflib.unified_diff(golden_text.splitlines(keepends=True),
                                     recorded.splitlines(keepends=True),
                                     fromfile=str(golden), tofile="recorded"))
    return TraceComparison(False, diff)
