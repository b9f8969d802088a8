"""Regenerate the frozen test fixtures.

Golden traces are written from the closed-form candidate sets {r, p_i},
not from a run of the search code. The distance table comes from the
multigraph shortest-path routine, point by point.
"""

from pathlib import Path

from covertree_forensics.dataset import Dataset, write_dataset
from covertree_forensics.graph import generate_tall_imbalanced, shortest_path_distance
from covertree_forensics.metric import FiniteMetric

HERE = Path(__file__).resolve().parent.parent / "tests"


def golden_trace(m: int) -> str:
    return "".join(f"level {i} candidates r,p{i}\n" for i in range(m * m, 0, -1))


def distance_table(m: int) -> Dataset:
    ds = generate_tall_imbalanced(m)
    locs, g = ds.space.locations, ds.graph
    n = len(locs)
    rows = [[shortest_path_distance(g, locs[a], locs[b]) for b in range(n)] for a in range(n)]
    return Dataset(FiniteMetric(rows, ds.space.labels), ds.reference, query_point=ds.query_point)


def main():
    (HERE / "golden").mkdir(exist_ok=True)
    (HERE / "fixtures").mkdir(exist_ok=True)
    for name in ("insert_m11.txt", "nn_m11.txt"):
        (HERE / "golden" / name).write_text(golden_trace(11))
    write_dataset(distance_table(11), HERE / "fixtures" / "tall_m11_distances.txt", matrix=True)
    print("fixtures written under", HERE)


if __name__ == "__main__":
    main()
