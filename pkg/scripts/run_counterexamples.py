"""Run every counterexample at the given sizes and print a summary table.

    python3 scripts/run_counterexamples.py --m 21 --dual-m 20 --out results/
"""

import argparse
import json
from pathlib import Path

from covertree_forensics.experiments import (run_dual_complexity, run_dual_self_neighbor,
                                             run_insert_counterexample, run_nn_counterexample)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--m", type=int, default=21, help="tall family parameter")
    ap.add_argument("--self-m", type=int, default=11)
    ap.add_argument("--dual-m", type=int, default=20, help="bichromatic family parameter")
    ap.add_argument("--out", type=Path, help="directory for one JSON file per experiment")
    args = ap.parse_args()

    results = [run_insert_counterexample(args.m), run_nn_counterexample(args.m),
               run_dual_self_neighbor(args.self_m), run_dual_complexity(args.dual_m)]
    print(f"{'experiment':<16}{'m':>4}{'lower':>10}{'claimed':>10}  contradiction  ok   ms")
    for r in results:
        print(f"{r.experiment:<16}{r.m:>4}{r.lower_bound:>10}{r.claimed_bound:>10}  "
              f"{str(r.contradiction):<13}  {str(r.ok):<5}{r.runtime_ms:.0f}")
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        for r in results:
            (args.out / f"{r.experiment}_m{r.m}.json").write_text(r.to_json() + "\n")
    if not all(r.ok for r in results):
        raise SystemExit(1)


if __name__ == "__main__":
    main()
