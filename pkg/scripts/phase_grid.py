"""Sweep rank and sampling ratios, print the success grid as text.

Each cell runs seeded trials of the exact-recovery path on a fresh Gaussian
low-rank instance and records the fraction that recovered the matrix to
working precision. The printed grid has rank growing down the rows and the
per-column sample budget growing across the columns; the success region
should be the upper triangle d >= r.
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from lifelong_mc.harness import SweepGrid, cmd_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=50)
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--steps", type=int, default=10,
                    help="grid resolution per axis (ratios k/steps)")
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--out", default="results/phase_grid.csv")
    args = ap.parse_args()

    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    ratios = [k / args.steps for k in range(1, args.steps + 1)]
    grid = SweepGrid(m=args.m, n=args.n, rank_ratios=ratios,
                     sample_ratios=ratios, trials_per_cell=args.trials)
    path, rows = cmd_sweep(grid, seed=args.seed, out=args.out)

    frac = {(row["rank_ratio"], row["sample_ratio"]): row["success_fraction"]
            for row in rows}
    header = "r\\d " + " ".join(f"{int(s * args.m):4d}" for s in ratios)
    print(header)
    for rr in ratios:
        cells = " ".join(f"{frac[(rr, sr)]:4.2f}" for sr in ratios)
        print(f"{int(rr * args.m):3d} {cells}")
    print(f"-> {path}")


if __name__ == "__main__":
    main()
