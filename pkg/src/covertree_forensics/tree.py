"""Cover trees in compressed form.

Every point is stored once, at its top level ``l(p)``. The implicit tree is
read off by accessor logic: node ``(p, i)`` exists for every ``i <= l(p)``,
and ``(p, i)`` has the self-child ``(p, i - 1)`` plus the *non-trivial*
children ``{c : parent(c) = p, l(c) = i - 1}``. The root sits at level
``+inf``; ``root_level`` is a finite stand-in that lies above every other
level.
"""

from __future__ import annotations

from bisect import bisect_right, insort
from typing import Iterable, Iterator, NamedTuple

from .metric import MetricSpace

__all__ = [
    "CoverTree",
    "TreeViolation",
    "ExplicitNode",
    "verify_invariants",
    "explicit_nodes",
    "explicit_depth",
]


class CoverTree:
    def __init__(self, root: int | None = None, root_level: int = 0) -> None:
        self.root = root
        self.root_level = root_level
        self.level: dict[int, int] = {}
        self.parent: dict[int, int] = {}
        self._kids: dict[int, dict[int, list[int]]] = {}
        # ascending levels t at which node (p, t) has a non-trivial child
        self._branch: dict[int, list[int]] = {}
        if root is not None:
            self._kids[root] = {}
            self._branch[root] = []

    @classmethod
    def from_parents(cls, root: int, root_level: int, levels: dict[int, int],
                     parents: dict[int, int]) -> "CoverTree":
        t = cls(root, root_level)
        t.level = dict(levels)
        t.level.pop(root, None)
        t.parent = dict(parents)
        t.parent.pop(root, None)
        t.reindex()
        return t

    def reindex(self) -> None:
        """Rebuild the child index from ``level`` and ``parent``."""
        self._kids = {p: {} for p in self}
        self._branch = {p: [] for p in self}
        for c in sorted(self.parent):
            p = self.parent[c]
            self._kids.setdefault(p, {}).setdefault(self.level[c], []).append(c)
        for p, by_level in self._kids.items():
            self._branch[p] = sorted(lv + 1 for lv in by_level)

    def copy(self) -> "CoverTree":
        return CoverTree.from_parents(self.root, self.root_level, self.level, self.parent)

    def __contains__(self, p: int) -> bool:
        return p == self.root or p in self.level

    def __len__(self) -> int:
        return 0 if self.root is None else 1 + len(self.level)

    def __iter__(self) -> Iterator[int]:
        if self.root is None:
            return
        yield self.root
        yield from sorted(self.level, key=lambda p: (-self.level[p], p))

    def level_of(self, p: int) -> int:
        return self.root_level if p == self.root else self.level[p]

    def add(self, p: int, level: int, parent: int) -> None:
        if p in self:
            raise ValueError(f"point {p} already in tree")
        self.level[p] = level
        self.parent[p] = parent
        self._kids[p] = {}
        self._branch[p] = []
        by_level = self._kids.setdefault(parent, {})
        if level not in by_level:
            insort(self._branch.setdefault(parent, []), level + 1)
        insort(by_level.setdefault(level, []), p)

    def children_at(self, p: int, i: int) -> list[int]:
        """Non-trivial children of node ``(p, i)``; they live at level ``i - 1``."""
        return self._kids[p].get(i - 1, [])

    def branch_levels(self, p: int) -> list[int]:
        return self._branch[p]

    def next_branch_level(self, p: int, i: int) -> int | None:
        """Highest ``t <= i`` at which node ``(p, t)`` has a non-trivial child."""
        b = self._branch[p]
        k = bisect_right(b, i)
        return b[k - 1] if k else None

    @property
    def level_index(self) -> list[int]:
        return sorted({t for b in self._branch.values() for t in b})

    def cover_set(self, i: int) -> list[int]:
        """``C_i = {p : l(p) >= i}``; the root always belongs."""
        if self.root is None:
            return []
        return [self.root] + sorted(p for p, lv in self.level.items() if lv >= i)

    def descendants(self, p: int, j: int) -> list[int]:
        """Points below node ``(p, j)``, including ``p`` itself."""
        out = [p]
        stack = [c for lv, cs in self._kids[p].items() if lv <= j - 1 for c in cs]
        while stack:
            c = stack.pop()
            out.append(c)
            for cs in self._kids[c].values():
                stack.extend(cs)
        return sorted(out)

    def dumps(self) -> str:
        """Line-oriented form, one ``node <point> level <l> parent <point|none>`` per point."""
        lines = []
        for p in self:
            par = "none" if p == self.root else str(self.parent[p])
            lines.append(f"node {p} level {self.level_of(p)} parent {par}")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def loads(cls, text: str) -> "CoverTree":
        return cls.from_lines(text.splitlines())

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "CoverTree":
        root, root_level = None, 0
        levels: dict[int, int] = {}
        parents: dict[int, int] = {}
        for raw in lines:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 6 or parts[0] != "node" or parts[2] != "level" or parts[4] != "parent":
                raise ValueError(f"malformed tree line: {raw!r}")
            p, lv = int(parts[1]), int(parts[3])
            if parts[5] == "none":
                if root is not None:
                    raise ValueError("tree has two roots")
                root, root_level = p, lv
            else:
                levels[p] = lv
                parents[p] = int(parts[5])
        if root is None:
            if levels:
                raise ValueError("tree without a root")
            return cls()
        return cls.from_parents(root, root_level, levels, parents)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoverTree):
            return NotImplemented
        return (self.root, self.root_level, self.level, self.parent) == (
            other.root, other.root_level, other.level, other.parent)

    def __repr__(self) -> str:
        return f"CoverTree(root={self.root}, root_level={self.root_level}, size={len(self)})"


class TreeViolation(NamedTuple):
    condition: str  # "root", "node", "covering", "separation"
    witness: tuple


def verify_invariants(t: CoverTree, space: MetricSpace) -> list[TreeViolation]:
    """Return every violated cover-tree condition with a witness; empty if valid.

    Separation is checked pairwise: a pair ``a, b`` shares the cover sets
    ``C_i`` for all ``i <= min(l(a), l(b))`` and the requirement
    ``d(a, b) > 2^i`` is tightest at that minimum.
    """
    out: list[TreeViolation] = []
    if t.root is None:
        if t.level:
            out.append(TreeViolation("root", ()))
        return out
    n = len(space)
    pts = list(t)
    for p in pts:
        if not 0 <= p < n:
            out.append(TreeViolation("node", (p,)))
    if out:
        return out
    for p, lv in t.level.items():
        if lv >= t.root_level:
            out.append(TreeViolation("root", (p, lv)))
    for p, lv in sorted(t.level.items()):
        par = t.parent.get(p)
        if par is None or par not in t:
            out.append(TreeViolation("node", (p, par)))
            continue
        # the root is at +inf; a too-low root_level is the "root" condition's business
        if par != t.root and t.level[par] < lv + 1:
            out.append(TreeViolation("node", (p, par)))
            continue
        if space.dist(p, par) > space.pow2(lv + 1):
            out.append(TreeViolation("covering", (p, par)))
    # every point must reach the root
    for p in t.level:
        seen = {p}
        x = p
        while x != t.root:
            x = t.parent.get(x)
            if x is None or x in seen:
                out.append(TreeViolation("node", (p, "no path to root")))
                break
            seen.add(x)
    for ia, a in enumerate(pts):
        la = t.level_of(a) if a != t.root else None
        for b in pts[ia + 1:]:
            lb = t.level.get(b)
            lv = lb if la is None else min(la, lb)
            if space.dist(a, b) <= space.pow2(lv):
                out.append(TreeViolation("separation", (lv, a, b)))
    return out


class ExplicitNode(NamedTuple):
    """One node of the explicit tree: ``point`` over levels ``[low, level_class]``.

    ``low`` is ``None`` for a class reaching down to ``-inf``. For the root's
    top class ``level_class`` is the finite ``root_level``.
    """

    point: int
    level_class: int
    low: int | None
    depth: int
    parent: tuple[int, int] | None  # (point, level_class) of the explicit parent


def explicit_nodes(t: CoverTree) -> list[ExplicitNode]:
    """Quotient of the implicit tree: ``p``'s chain splits below each branching level."""
    if t.root is None:
        return []
    out: list[ExplicitNode] = []
    top_depth: dict[int, int] = {}
    for p in t:  # parents come before children
        top = t.level_of(p)
        if p == t.root:
            depth, par = 1, None
        else:
            a = t.parent[p]
            above = t.level[p] + 1
            ba = t.branch_levels(a)
            idx = len(ba) - bisect_right(ba, above)
            depth = top_depth[a] + idx + 1
            par = (a, t.level_of(a) if idx == 0 else ba[len(ba) - idx] - 1)
        top_depth[p] = depth
        cuts = sorted(t.branch_levels(p), reverse=True)
        hi = top
        for k, cut in enumerate(cuts):
            out.append(ExplicitNode(p, hi, cut, depth + k, par))
            par = (p, hi)
            hi = cut - 1
        out.append(ExplicitNode(p, hi, None, depth + len(cuts), par))
    return out


def explicit_depth(t: CoverTree) -> int:
    """Number of explicit nodes on the longest node-to-root path."""
    return max((node.depth for node in explicit_nodes(t)), default=0)
