"""Datasets and their line-oriented text format.

    points <n>
    <label>                                  (n lines)
    metric closed-form <family> m=<int>      (or: metric matrix, then n-1 rows)
    <d(1,0)>
    <d(2,0)> <d(2,1)>
    ...
    set reference <id> <id> ...
    set query <id> ...
    query-point <id>
    tree reference
    node <point> level <l> parent <point|none>
    ...
    end

Matrix entries use the exact form ``m*2^e``. Floats are dyadic too, so
machine-float spaces round-trip exactly but load back as exact spaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .metric import FiniteMetric, MetricSpace
from .numeric import Dyadic, format_dyadic, parse_dyadic
from .tree import CoverTree

__all__ = ["Dataset", "dumps_dataset", "loads_dataset", "write_dataset", "read_dataset"]


@dataclass
class Dataset:
    space: MetricSpace
    reference: list[int]
    query: list[int] | None = None
    query_point: int | None = None
    trees: dict[str, CoverTree] = field(default_factory=dict)
    family: str | None = None
    m: int | None = None


def _as_dyadic(x) -> Dyadic:
    return x if isinstance(x, Dyadic) else Dyadic.coerce(Fraction(x))


def dumps_dataset(ds: Dataset, matrix: bool = False) -> str:
    sp = ds.space
    n = len(sp)
    lines = [f"points {n}"]
    for lab in sp.labels:
        if not lab or any(ch.isspace() for ch in lab):
            raise ValueError(f"label {lab!r} must be a single non-empty token")
        lines.append(lab)
    if ds.family is not None and not matrix:
        lines.append(f"metric closed-form {ds.family} m={ds.m}")
    else:
        lines.append("metric matrix")
        for a in range(1, n):
            lines.append(" ".join(format_dyadic(_as_dyadic(sp.dist(a, b))) for b in range(a)))
    lines.append("set reference " + " ".join(map(str, ds.reference)))
    if ds.query is not None:
        lines.append("set query " + " ".join(map(str, ds.query)))
    if ds.query_point is not None:
        lines.append(f"query-point {ds.query_point}")
    for name, t in ds.trees.items():
        lines.append(f"tree {name}")
        lines.extend(t.dumps().splitlines())
        lines.append("end")
    return "\n".join(lines) + "\n"


def _closed_form(family: str, params: dict[str, str]):
    from .graph import generate_bichromatic, generate_tall_imbalanced

    m = int(params["m"])
    if family == "tall":
        return generate_tall_imbalanced(m)
    if family == "bichromatic":
        return generate_bichromatic(m)
    raise ValueError(f"unknown closed-form family {family!r}")


def loads_dataset(text: str) -> Dataset:
    lines = [ln.rstrip("\n") for ln in text.splitlines()]
    lines = [ln for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
    pos = 0

    def take() -> str:
        nonlocal pos
        if pos >= len(lines):
            raise ValueError("unexpected end of dataset file")
        pos += 1
        return lines[pos - 1].strip()

    head = take().split()
    if len(head) != 2 or head[0] != "points":
        raise ValueError("dataset must start with 'points <n>'")
    n = int(head[1])
    labels = [take() for _ in range(n)]
    metric = take().split()
    if metric[:1] != ["metric"] or len(metric) < 2:
        raise ValueError("expected a 'metric' line")
    generated = None
    if metric[1] == "closed-form":
        params = dict(tok.split("=", 1) for tok in metric[3:])
        generated = _closed_form(metric[2], params)
        if generated.space.labels != labels:
            raise ValueError("labels do not match the closed-form family")
        space: MetricSpace = generated.space
    elif metric[1] == "matrix":
        rows = [[Dyadic(0)] * n for _ in range(n)]
        for a in range(1, n):
            entries = take().split()
            if len(entries) != a:
                raise ValueError(f"matrix row {a} needs {a} entries")
            for b, tok in enumerate(entries):
                rows[a][b] = rows[b][a] = parse_dyadic(tok)
        space = FiniteMetric(rows, labels, exact=True)
    else:
        raise ValueError(f"unknown metric kind {metric[1]!r}")
    ds = Dataset(space, reference=list(range(n)))
    if generated is not None:
        ds.family, ds.m = metric[2], generated.m
    while pos < len(lines):
        parts = take().split()
        if parts[0] == "set":
            ids = [int(x) for x in parts[2:]]
            if parts[1] == "reference":
                ds.reference = ids
            elif parts[1] == "query":
                ds.query = ids
            else:
                raise ValueError(f"unknown set {parts[1]!r}")
        elif parts[0] == "query-point":
            ds.query_point = int(parts[1])
        elif parts[0] == "tree":
            body = []
            while True:
                ln = take()
                if ln == "end":
                    break
                body.append(ln)
            ds.trees[parts[1]] = CoverTree.from_lines(body)
        else:
            raise ValueError(f"unknown directive {parts[0]!r}")
    return ds


def write_dataset(ds: Dataset, path: str | Path, matrix: bool = False) -> None:
    Path(path).write_text(dumps_dataset(ds, matrix=matrix))


def read_dataset(path: str | Path) -> Dataset:
    return loads_dataset(Path(path).read_text())
