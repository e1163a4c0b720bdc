"""Desk-scale runtime ECDFs on a D-dimensional "simple"/"hard" extension.

Every method tends to stall at the paraboloid vertex (error 1), which puts
the ECDF plateau at 10/51 of the target pairs.  Prints, per optimizer, the
plateau, the share of runs at or below error 1, and writes the curves.

    python3 scripts/vertex_plateau.py --dim 10 --count 20 --budget 10000 --out plateau
"""
import argparse
from pathlib import Path

import numpy as np

from gklslab.bench import curve_to_csv, ecdf, first_hits, make_targets
from gklslab.optim import OptimizerConfig, run_on_problem
from gklslab.rng import derive_seed
from gklslab.suites import extended_manifest, materialize


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=10)
    ap.add_argument("--difficulty", default="simple", choices=["simple", "hard"])
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--budget", type=int, default=10_000)
    ap.add_argument("--optimizers", default="random_search,de_lpr")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=None, help="directory for ecdf_<optimizer>.csv")
    args = ap.parse_args()

    manifest = extended_manifest(args.dim, args.difficulty, args.count, args.seed)
    problems = materialize(manifest)
    ladder = make_targets()
    print(f"{manifest.name}: {len(problems)} problems, budget {args.budget}")
    for name in args.optimizers.split(","):
        traces = [
            run_on_problem(OptimizerConfig(name, derive_seed(args.seed, manifest.name, p.problem_index, name)),
                           p, args.budget)
            for p in problems
        ]
        finals = np.array([t.final_error for t in traces])
        curve = ecdf([first_hits(t, ladder) for t in traces], args.budget)
        print(f"  {name:14s} plateau {curve.y[-1]:.4f}  runs <= 1: {np.sum(finals <= 1)}/{len(finals)}"
              f"  final error median {np.median(finals):.6g} max {finals.max():.6g}")
        if args.out:
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / f"ecdf_{name}.csv").write_text(curve_to_csv(curve.x, curve.y))


if __name__ == "__main__":
    main()
