"""Value histogram of all minimizers and how many lie below zero.

For mod suites the number of negative minima grows with h; this prints the
histogram and writes the (h, count < 0) scatter as CSV.

    python3 scripts/minima_stats.py --dim 10 --mod --out scatter.csv
    python3 scripts/minima_stats.py --class-id 7
"""
import argparse
import csv

import numpy as np

from gklslab.generator import local_minima_stats
from gklslab.suites import canonical_manifest, materialize, mod_manifest


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--class-id", type=int)
    ap.add_argument("--dim", type=int, default=10)
    ap.add_argument("--mod", action="store_true")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="CSV file for the (h, negative count) pairs")
    args = ap.parse_args()
    if args.class_id is None and not args.mod:
        ap.error("pass --class-id or --mod")

    manifest = canonical_manifest(args.class_id, suite_seed=args.seed) if args.class_id else \
        mod_manifest(args.dim, suite_seed=args.seed)
    stats = local_minima_stats(materialize(manifest), bin_edges=np.linspace(-1, 1, 21))
    print(f"{manifest.name}: minimizer values (vertex included)")
    for lo, hi, f in zip(stats.bin_edges, stats.bin_edges[1:], stats.frequencies):
        print(f"  [{lo:+.1f}, {hi:+.1f})  {f:7.4f}  {'#' * int(round(200 * f))}")
    neg = np.array(stats.negative_counts)
    print(f"negative minima per problem: mean {neg.mean():.2f}, max {neg.max()}")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["h", "negative"])
            w.writerows(stats.scatter)


if __name__ == "__main__":
    main()
