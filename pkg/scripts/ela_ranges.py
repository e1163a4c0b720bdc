"""Min/max of every ELA feature per GKLS suite at one dimension.

Comparable in layout to a per-suite feature range table: one row per
feature, a (min, max) pair per suite.  250*D uniform samples per problem
by default; use --count to shrink the suites for a quick look.

    python3 scripts/ela_ranges.py --dim 10 --count 10
"""
import argparse

import numpy as np

from gklslab.ela import ALL_FEATURES, compute_features, draw_sample
from gklslab.rng import derive_seed
from gklslab.suites import extended_manifest, materialize, mod_manifest


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=10)
    ap.add_argument("--count", type=int, default=None, help="problems per suite (default 100/100/50)")
    ap.add_argument("--samples-per-dim", type=int, default=250)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    suites = [extended_manifest(args.dim, d, args.count or 100, args.seed) for d in ("simple", "hard")]
    suites.append(mod_manifest(args.dim, args.count or 50, args.seed))
    table = {}
    for m in suites:
        rows = []
        for p in materialize(m):
            seed = derive_seed(args.seed, m.name, p.problem_index, "ela")
            s = draw_sample(p, args.samples_per_dim * args.dim, seed)
            rows.append(compute_features(s.points, s.values))
        table[m.name] = {k: np.array([r[k] for r in rows]) for k in ALL_FEATURES}
        print(f"# {m.name}: {len(rows)} problems")

    names = [m.name for m in suites]
    print(f"{'feature':34s}" + "".join(f"{n + ' min':>13s}{n + ' max':>13s}" for n in names))
    for k in ALL_FEATURES:
        cells = []
        for n in names:
            v = table[n][k]
            cells += [np.nanmin(v), np.nanmax(v)] if np.any(np.isfinite(v)) else [np.nan, np.nan]
        print(f"{k:34s}" + "".join(f"{c:13.3e}" for c in cells))


if __name__ == "__main__":
    main()
