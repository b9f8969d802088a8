"""Finite metric spaces, the brute-force neighbor oracle, expansion constants
and the metric audit.

Points are integer indices ``0..n-1`` into a space; every tie in this package
is broken by ascending index.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .numeric import Distance, Dyadic, pow2

__all__ = [
    "MetricSpace",
    "FiniteMetric",
    "LineMetric",
    "EuclideanMetric",
    "NeighborAnswer",
    "InsufficientPointsError",
    "brute_force_knn",
    "expansion_constant",
    "MetricViolation",
    "audit_metric",
]


class MetricSpace:
    """Base class: subclasses set ``labels`` and implement :meth:`dist`.

    ``exact`` spaces return :class:`Dyadic` distances; the others return
    floats and are meant for random Euclidean test data only.
    """

    exact: bool = True
    labels: list[str]

    def __len__(self) -> int:
        return len(self.labels)

    def dist(self, a: int, b: int) -> Distance:
        raise NotImplementedError

    def pow2(self, i: int) -> Distance:
        return pow2(i) if self.exact else math.ldexp(1.0, i)

    def zero(self) -> Distance:
        return Dyadic(0) if self.exact else 0.0

    def label(self, p: int) -> str:
        return self.labels[p]

    def index(self, label: str) -> int:
        try:
            return self._label_index[label]
        except AttributeError:
            self._label_index = {name: i for i, name in enumerate(self.labels)}
            return self._label_index[label]

    def points(self) -> range:
        return range(len(self))


class FiniteMetric(MetricSpace):
    """Explicit distance table."""

    def __init__(self, matrix: Sequence[Sequence[Distance]], labels: Sequence[str] | None = None,
                 exact: bool | None = None) -> None:
        n = len(matrix)
        self._d = [list(row) for row in matrix]
        if any(len(row) != n for row in self._d):
            raise ValueError("distance table must be square")
        self.labels = list(labels) if labels is not None else [str(i) for i in range(n)]
        if len(self.labels) != n:
            raise ValueError("one label per point")
        if exact is None:
            exact = all(isinstance(x, Dyadic) for row in self._d for x in row)
        self.exact = exact

    @classmethod
    def from_space(cls, space: MetricSpace) -> "FiniteMetric":
        n = len(space)
        rows = [[space.dist(a, b) for b in range(n)] for a in range(n)]
        return cls(rows, space.labels, exact=space.exact)

    def dist(self, a: int, b: int) -> Distance:
        return self._d[a][b]

    def set(self, a: int, b: int, value: Distance, symmetric: bool = True) -> None:
        self._d[a][b] = value
        if symmetric:
            self._d[b][a] = value

    def scaled(self, factor_exp: int) -> "FiniteMetric":
        """Copy with every distance multiplied by ``2**factor_exp``."""
        f = pow2(factor_exp) if self.exact else math.ldexp(1.0, factor_exp)
        if self.exact:
            rows = [[Dyadic(x.num, x.exp + factor_exp) for x in row] for row in self._d]
        else:
            rows = [[x * f for x in row] for row in self._d]
        return FiniteMetric(rows, self.labels, exact=self.exact)


class LineMetric(MetricSpace):
    """Points on the real line with exact dyadic (or integer) coordinates.

    Coordinates may be negative; they are stored shifted so the smallest is 0.
    """

    def __init__(self, coords: Iterable, labels: Sequence[str] | None = None) -> None:
        raw = [c.to_fraction() if isinstance(c, Dyadic) else Fraction(c) for c in coords]
        lo = min(raw, default=Fraction(0))
        self.coords = [Dyadic.coerce(c - lo) for c in raw]
        self.labels = list(labels) if labels is not None else [str(c) for c in raw]

    def dist(self, a: int, b: int) -> Dyadic:
        return self.coords[a].absdiff(self.coords[b])


class EuclideanMetric(MetricSpace):
    """Machine-float Euclidean distance on coordinate rows."""

    exact = False

    def __init__(self, coords, labels: Sequence[str] | None = None) -> None:
        arr = np.asarray(coords, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        self.coords = arr
        self._rows = [tuple(row) for row in arr.tolist()]
        self.labels = list(labels) if labels is not None else [f"x{i}" for i in range(len(arr))]

    def dist(self, a: int, b: int) -> float:
        return math.dist(self._rows[a], self._rows[b])


class NeighborAnswer(NamedTuple):
    query: int
    neighbors: list[tuple[int, Distance]]

    @property
    def nearest(self) -> tuple[int, Distance]:
        return self.neighbors[0]


class InsufficientPointsError(ValueError):
    pass


def brute_force_knn(space: MetricSpace, q: int, R: Iterable[int], k: int = 1,
                    exclude_self: bool = False) -> NeighborAnswer:
    """Exact k nearest neighbors of ``q`` in ``R`` by a full scan."""
    if k < 1:
        raise ValueError("k must be at least 1")
    cands = [(space.dist(q, r), r) for r in R if not (exclude_self and r == q)]
    if len(cands) < k:
        raise InsufficientPointsError(f"insufficient points: need {k}, have {len(cands)}")
    cands.sort(key=lambda t: (t[0], t[1]))
    return NeighborAnswer(q, [(r, d) for d, r in cands[:k]])


def expansion_constant(space: MetricSpace, R: Sequence[int] | None = None) -> Fraction:
    """Smallest ``c >= 2`` with ``|B(p, 2t)| <= c |B(p, t)|`` over ``p`` in R, ``t >= 0``.

    Closed-ball sizes are right-continuous step functions of ``t`` that jump
    only at ``t = d(p, q)`` (for the inner ball) and ``t = d(p, q) / 2`` (for
    the outer ball), so scanning those radii is exact. Returned as a
    ``Fraction``; non-integer ratios are not rounded up.
    """
    R = list(space.points()) if R is None else list(R)
    if not R:
        raise ValueError("expansion constant of an empty set")
    best = Fraction(2)
    for p in R:
        ds = sorted(space.dist(p, q) for q in R)
        radii = set(ds)
        radii.update(d.half() if isinstance(d, Dyadic) else d / 2 for d in ds)
        for t in radii:
            inner = bisect_right(ds, t)
            outer = bisect_right(ds, t + t)
            ratio = Fraction(outer, inner)
            if ratio > best:
                best = ratio
    return best


class MetricViolation(NamedTuple):
    kind: str  # "identity", "symmetry", "triangle"
    points: tuple[int, ...]


def _int_matrix(space: MetricSpace) -> np.ndarray:
    n = len(space)
    raw = [[space.dist(a, b) for b in range(n)] for a in range(n)]
    emin = min((x.exp for row in raw for x in row if x.num), default=0)
    out = np.empty((n, n), dtype=object)
    for a in range(n):
        for b in range(n):
            out[a, b] = raw[a][b].scaled(emin)
    return out


def audit_metric(space: MetricSpace, max_points: int = 2000, rel_tol: float = 1e-12,
                 limit: int | None = 1000) -> list[MetricViolation]:
    """Check identity, symmetry and every triangle inequality.

    Exact spaces are compared exactly; float spaces with ``rel_tol``. At most
    ``limit`` triangle violations are listed.
    """
    n = len(space)
    if n > max_points:
        raise ValueError(f"{n} points exceeds audit guard of {max_points}")
    if n == 0:
        return []
    if space.exact:
        D = _int_matrix(space)
        slack = None
    else:
        D = np.array([[space.dist(a, b) for b in range(n)] for a in range(n)], dtype=float)
        slack = rel_tol * max(float(D.max()), 1.0)
    out: list[MetricViolation] = []
    for a in range(n):
        if D[a, a] != 0:
            out.append(MetricViolation("identity", (a,)))
        for b in range(a + 1, n):
            if D[a, b] != D[b, a] if slack is None else abs(D[a, b] - D[b, a]) > slack:
                out.append(MetricViolation("symmetry", (a, b)))
            elif D[a, b] == 0:
                out.append(MetricViolation("identity", (a, b)))
    for k in range(n):
        via = D[:, k:k + 1] + D[k:k + 1, :]
        bad = (D > via) if slack is None else (D > via + slack)
        if bad.any():
            for a, b in zip(*np.nonzero(bad)):
                out.append(MetricViolation("triangle", (int(a), k, int(b))))
                if limit is not None and len(out) >= limit:
                    return out
    return out
