"""Write the scaling CSVs for both families.

    python3 scripts/scaling_sweep.py --out results/
"""

import argparse
from pathlib import Path

from covertree_forensics.experiments import run_scaling_sweep


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--tall", default="11,13,15,17,19,21,25,31")
    ap.add_argument("--bichromatic", default="12,14,16,18,20,22")
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for family, ms in (("tall", args.tall), ("bichromatic", args.bichromatic)):
        csv_text = run_scaling_sweep(family, [int(x) for x in ms.split(",") if x])
        path = args.out / f"sweep_{family}.csv"
        path.write_text(csv_text)
        print(f"wrote {path}")
        print(csv_text)


if __name__ == "__main__":
    main()
