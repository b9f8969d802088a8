"""``ctf`` command line: dataset generation, counterexample runs, sweeps, correctness."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from .dataset import write_dataset
from .experiments import (ExperimentResult, run_correctness_suite, run_dual_complexity,
                          run_dual_self_neighbor, run_insert_counterexample,
                          run_nn_counterexample, run_scaling_sweep)
from .graph import RegimeError, generate_bichromatic, generate_tall_imbalanced
from .search import replay_trace


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.replace(",", " ").split()]


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _summary(r: ExperimentResult) -> str:
    key = {"insert": "xi", "nn": "xi", "dual-self": "self_neighbors",
           "dual-self-excluded": "self_neighbors",
           "dual-complexity": "reference_expansions"}[r.experiment]
    verdict = "contradiction" if r.contradiction else "no contradiction"
    return (f"{r.experiment} m={r.m}: {key}={r.measured[key]} lower_bound={r.lower_bound} "
            f"claimed_bound={r.claimed_bound} -> {verdict} "
            f"({'as expected' if r.ok else 'UNEXPECTED'}, {r.runtime_ms:.0f} ms)\n")


def _finish_experiment(r: ExperimentResult, args) -> int:
    _emit(r.to_json() + "\n", args.out)
    sys.stderr.write(_summary(r))
    status = 0 if r.ok else 1
    if args.trace and r.trace is not None:
        Path(args.trace).write_text(r.trace)
    if args.golden:
        cmp = replay_trace(r.trace or "", args.golden)
        if not cmp.identical:
            sys.stderr.write("".join(cmp.diff))
            status = 1
    return status


def cmd_gen(args) -> int:
    gen = generate_tall_imbalanced if args.family == "tall" else generate_bichromatic
    ds = gen(args.m)
    write_dataset(ds, args.out, matrix=args.matrix)
    return 0


def cmd_insert(args) -> int:
    return _finish_experiment(run_insert_counterexample(args.m, trace=_tracing(args)), args)


def cmd_nn(args) -> int:
    return _finish_experiment(run_nn_counterexample(args.m, trace=_tracing(args)), args)


def cmd_dual(args) -> int:
    if args.self_neighbor:
        r = run_dual_self_neighbor(args.m, trace=_tracing(args), exclude_self=args.exclude_self)
    else:
        r = run_dual_complexity(args.m, trace=_tracing(args))
    return _finish_experiment(r, args)


def cmd_sweep(args) -> int:
    _emit(run_scaling_sweep(args.family, _int_list(args.m_list)), args.out)
    return 0


def cmd_verify(args) -> int:
    report = run_correctness_suite(args.seed, _int_list(args.sizes), inject_fault=args.fault)
    _emit(report.to_json() + "\n", args.out)
    for c in report.cases:
        sys.stderr.write(f"{'PASS' if c.passed else 'FAIL'} {c.name} size={c.size} {c.detail}\n")
    return 0 if report.passed else 1


def _tracing(args) -> bool:
    return bool(args.trace or args.golden)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ctf", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a generated dataset file")
    g.add_argument("--family", choices=["tall", "bichromatic"], required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--matrix", action="store_true", help="store the full distance matrix")
    g.set_defaults(func=cmd_gen)

    for name, func, hlp in (("insert-ce", cmd_insert, "Insert counterexample"),
                            ("nn-ce", cmd_nn, "nearest-neighbor counterexample"),
                            ("dual-ce", cmd_dual, "dual-tree counterexamples")):
        e = sub.add_parser(name, help=hlp)
        e.add_argument("--m", type=int, required=True)
        e.add_argument("--out", help="JSON result file (default stdout)")
        e.add_argument("--trace", help="write the per-level log here")
        e.add_argument("--golden", help="compare the per-level log with this file")
        if name == "dual-ce":
            e.add_argument("--self", dest="self_neighbor", action="store_true",
                           help="Q = R run on the tall family instead of the bichromatic one")
            e.add_argument("--exclude-self", action="store_true",
                           help="with --self: skip each query's own point")
        e.set_defaults(func=func)

    s = sub.add_parser("sweep", help="CSV of counters against bounds over m")
    s.add_argument("--family", choices=["tall", "bichromatic"], required=True)
    s.add_argument("--m-list", default="", help="comma separated, e.g. 11,15,21")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="random Euclidean correctness suite")
    v.add_argument("--seed", type=int, required=True)
    v.add_argument("--sizes", default="50,100,200")
    v.add_argument("--fault", choices=["covering", "separation", "root", "node"],
                   help="corrupt each tree before checking it")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except RegimeError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
