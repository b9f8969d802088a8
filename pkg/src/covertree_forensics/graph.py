"""Continuous metric multigraphs and the two adversarial dataset families.

Both families live on a graph with two vertices ``r`` and ``q`` joined by a
unit edge ``e0`` and by long parallel edges whose lengths are ``2^(m*k + 2)``.
Points are halving sequences walking towards ``q``: the top point of group
``k`` sits at the midpoint of edge ``k`` and every lower point is the
midpoint between its upper neighbour and ``q``. That makes point ``i`` lie
at distance exactly ``2^(i+1)`` from ``q`` along its edge.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass
from typing import Sequence, Union

from .dataset import Dataset
from .metric import MetricSpace
from .numeric import Dyadic, pow2
from .tree import CoverTree

log = logging.getLogger(__name__)

__all__ = [
    "Edge",
    "Vertex",
    "OnEdge",
    "GraphPoint",
    "MetricMultigraph",
    "UnreachableError",
    "shortest_path_distance",
    "GraphMetric",
    "AdversarialDataset",
    "RegimeError",
    "tall_imbalanced_tree",
    "generate_tall_imbalanced",
    "generate_bichromatic",
    "closed_form_distance",
]


@dataclass(frozen=True)
class Edge:
    id: str
    u: str
    v: str
    length: Dyadic


@dataclass(frozen=True)
class Vertex:
    id: str


@dataclass(frozen=True)
class OnEdge:
    edge: str
    offset: Dyadic  # measured from the edge's ``u`` endpoint


GraphPoint = Union[Vertex, OnEdge]


class UnreachableError(ValueError):
    pass


class MetricMultigraph:
    """Undirected multigraph with positive exact edge lengths."""

    def __init__(self, vertices: Sequence[str], edges: Sequence[Edge]) -> None:
        self.vertices = list(vertices)
        vs = set(self.vertices)
        self.edges: dict[str, Edge] = {}
        for e in edges:
            if e.u not in vs or e.v not in vs:
                raise ValueError(f"edge {e.id} has an unknown endpoint")
            if not e.length > 0:
                raise ValueError(f"edge {e.id} must have positive length")
            if e.id in self.edges:
                raise ValueError(f"duplicate edge id {e.id}")
            self.edges[e.id] = e
        self._apsp: dict[str, dict[str, Dyadic]] | None = None

    def canonical(self, pt: GraphPoint) -> GraphPoint:
        if isinstance(pt, Vertex):
            if pt.id not in self.vertices:
                raise ValueError(f"unknown vertex {pt.id}")
            return pt
        e = self.edges[pt.edge]
        if pt.offset < 0 or pt.offset > e.length:
            raise ValueError(f"offset {pt.offset} outside edge {e.id}")
        if pt.offset == 0:
            return Vertex(e.u)
        if pt.offset == e.length:
            return Vertex(e.v)
        return pt

    def _dijkstra(self, src: str) -> dict[str, Dyadic]:
        adj: dict[str, list[tuple[str, Dyadic]]] = {v: [] for v in self.vertices}
        for e in self.edges.values():
            adj[e.u].append((e.v, e.length))
            adj[e.v].append((e.u, e.length))
        dist = {src: Dyadic(0)}
        heap = [(Dyadic(0), 0, src)]
        tick = 1
        while heap:
            d, _, v = heapq.heappop(heap)
            if d > dist[v]:
                continue
            for w, length in adj[v]:
                nd = d + length
                if w not in dist or nd < dist[w]:
                    dist[w] = nd
                    heapq.heappush(heap, (nd, tick, w))
                    tick += 1
        return dist

    def vertex_distances(self) -> dict[str, dict[str, Dyadic]]:
        if self._apsp is None:
            self._apsp = {v: self._dijkstra(v) for v in self.vertices}
        return self._apsp

    def anchor(self, pt: GraphPoint) -> dict[str, Dyadic]:
        """Shortest distance from ``pt`` to every reachable vertex."""
        apsp = self.vertex_distances()
        pt = self.canonical(pt)
        if isinstance(pt, Vertex):
            return dict(apsp[pt.id])
        e = self.edges[pt.edge]
        legs = ((e.u, pt.offset), (e.v, e.length - pt.offset))
        out: dict[str, Dyadic] = {}
        for end, leg in legs:
            for w, dw in apsp[end].items():
                cand = leg + dw
                if w not in out or cand < out[w]:
                    out[w] = cand
        return out


def _point_distance(a: GraphPoint, b: GraphPoint, anchor_a: dict, anchor_b: dict) -> Dyadic:
    best = None
    for w, da in anchor_a.items():
        db = anchor_b.get(w)
        if db is not None:
            cand = da + db
            if best is None or cand < best:
                best = cand
    if isinstance(a, OnEdge) and isinstance(b, OnEdge) and a.edge == b.edge:
        direct = a.offset.absdiff(b.offset)
        if best is None or direct < best:
            best = direct
    if best is None:
        raise UnreachableError("unreachable")
    return best


def shortest_path_distance(g: MetricMultigraph, a: GraphPoint, b: GraphPoint) -> Dyadic:
    """Length of the shortest path between two points of the continuous graph.

    Any path either stays inside the edge shared by ``a`` and ``b`` or leaves
    through a vertex, so the minimum over vertices plus the direct segment is
    exact.
    """
    a, b = g.canonical(a), g.canonical(b)
    if a == b:
        return Dyadic(0)
    return _point_distance(a, b, g.anchor(a), g.anchor(b))


class GraphMetric(MetricSpace):
    """Named points on a multigraph with the shortest-path metric."""

    def __init__(self, graph: MetricMultigraph, locations: Sequence[GraphPoint],
                 labels: Sequence[str]) -> None:
        self.graph = graph
        self.locations = [graph.canonical(p) for p in locations]
        self.labels = list(labels)
        if len(self.labels) != len(self.locations):
            raise ValueError("one label per location")
        self._anchors = [graph.anchor(p) for p in self.locations]

    def dist(self, a: int, b: int) -> Dyadic:
        if a == b:
            return Dyadic(0)
        return _point_distance(self.locations[a], self.locations[b],
                               self._anchors[a], self._anchors[b])


class RegimeError(ValueError):
    pass


@dataclass
class AdversarialDataset(Dataset):
    """A generated family; ``query_point`` is the vertex ``q``."""

    graph: MetricMultigraph | None = None

    @property
    def tree(self) -> CoverTree:
        return self.trees["reference"]

    @property
    def root(self) -> int:
        return self.reference[0]


def tall_imbalanced_tree(m: int, index: Sequence[int] | None = None, root: int = 0) -> CoverTree:
    """Prescribed tree of the tall family: ``l(x_i) = i``, root at ``m^2 + 1``.

    ``index[i]`` is the point id of ``x_i`` (default ``i``). Group tops
    (``m | i``) hang off the root, every other point off ``x_{i+1}``.
    """
    n = m * m
    idx = list(range(n + 1)) if index is None else list(index)
    levels = {idx[i]: i for i in range(1, n + 1)}
    parents = {idx[i]: root if i % m == 0 else idx[i + 1] for i in range(1, n + 1)}
    return CoverTree.from_parents(root, n + 1, levels, parents)


def _long_edges(prefix: str, m: int) -> list[Edge]:
    return [Edge(f"{prefix}{k}", "r", "q", pow2(m * k + 2)) for k in range(1, m + 1)]


def _halving_chain(prefix: str, m: int) -> list[OnEdge]:
    """Locations of ``x_1 .. x_{m^2}`` on edges ``prefix1 .. prefix{m}``."""
    out = []
    for i in range(1, m * m + 1):
        k = -(-i // m)
        to_q = pow2(i + 1)
        out.append(OnEdge(f"{prefix}{k}", pow2(m * k + 2) - to_q))
    return out


def generate_tall_imbalanced(m: int) -> AdversarialDataset:
    """Tall imbalanced family: ``R = {r, p_1 .. p_{m^2}}`` plus the outside query ``q``.

    Point ids: ``r = 0``, ``p_i = i``, ``q = m^2 + 1``.
    """
    if m <= 10:
        raise RegimeError(f"m={m} is below the adversarial regime (need m > 10)")
    n = m * m
    g = MetricMultigraph(["r", "q"], [Edge("e0", "r", "q", Dyadic(1))] + _long_edges("e", m))
    locs = [Vertex("r")] + _halving_chain("e", m) + [Vertex("q")]
    labels = ["r"] + [f"p{i}" for i in range(1, n + 1)] + ["q"]
    space = GraphMetric(g, locs, labels)
    ds = AdversarialDataset(space, reference=list(range(n + 1)), query_point=n + 1,
                            family="tall", m=m, graph=g)
    ds.trees["reference"] = tall_imbalanced_tree(m)
    return ds


def generate_bichromatic(m: int) -> AdversarialDataset:
    """Bichromatic family: mirrored chains ``r_i`` (on ``h`` edges) and ``q_i`` (on ``e`` edges).

    Point ids: ``r = 0``, ``r_i = i``, ``q_i = m^2 + i``, vertex ``q = 2 m^2 + 1``.
    ``R = {r, r_1..}`` and ``Q = {r, q_1..}``; both prescribed trees have the
    tall shape.
    """
    if m < 12:
        raise RegimeError(f"m={m} too small for the bichromatic family (need m >= 12)")
    if m <= 100:
        log.warning("bichromatic m=%d: the contradiction is only guaranteed for large m", m)
    n = m * m
    g = MetricMultigraph(
        ["r", "q"],
        [Edge("e0", "r", "q", Dyadic(1))] + _long_edges("e", m) + _long_edges("h", m))
    locs = [Vertex("r")] + _halving_chain("h", m) + _halving_chain("e", m) + [Vertex("q")]
    labels = (["r"] + [f"r{i}" for i in range(1, n + 1)]
              + [f"q{i}" for i in range(1, n + 1)] + ["q"])
    space = GraphMetric(g, locs, labels)
    ref = list(range(n + 1))
    qry = [0] + [n + i for i in range(1, n + 1)]
    ds = AdversarialDataset(space, reference=ref, query=qry, query_point=2 * n + 1,
                            family="bichromatic", m=m, graph=g)
    ds.trees["reference"] = tall_imbalanced_tree(m, ref)
    ds.trees["query"] = tall_imbalanced_tree(m, qry)
    return ds


def _chain_position(family: str, m: int, p: int) -> tuple[str, int] | None:
    """``(side, i)`` for a chain point, ``None`` for the vertices r and q."""
    n = m * m
    if p == 0:
        return None
    if family == "tall":
        return None if p == n + 1 else ("e", p)
    if p == 2 * n + 1:
        return None
    return ("h", p) if p <= n else ("e", p - n)


def closed_form_distance(family: str, m: int, a: int, b: int) -> Dyadic:
    """Pairwise distances of both families in closed form (checked against the graph)."""
    if a == b:
        return Dyadic(0)
    n = m * m
    qv = n + 1 if family == "tall" else 2 * n + 1
    pa, pb = _chain_position(family, m, a), _chain_position(family, m, b)
    if pa is None and pb is None:
        return Dyadic(1)  # r to q
    if pa is None:
        a, b, pa, pb = b, a, pb, pa
    side, i = pa
    if pb is None:
        if b == qv:
            return pow2(i + 1)
        return pow2(i + 1) if i % m == 0 else pow2(i + 1) + 1
    side_b, j = pb
    if side == side_b and -(-i // m) == -(-j // m):
        return pow2(i + 1).absdiff(pow2(j + 1))
    return pow2(i + 1) + pow2(j + 1)
