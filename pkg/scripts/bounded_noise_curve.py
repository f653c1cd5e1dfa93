"""Track a growing subspace under bounded noise and report the error curve.

Streams the cumulative generator (rank grows 1..5 in blocks) through the
tracker at several noise levels, writes the per-column error log for each
run, and prints block-wise median errors so the plateau structure is visible
without plotting.
"""

import argparse
import csv
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from lifelong_mc.datagen import CUMULATIVE_WIDTHS
from lifelong_mc.harness import RunConfig, cmd_run


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(line for line in fh if not line.startswith("#")))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=100)
    ap.add_argument("--d", type=int, default=80)
    ap.add_argument("--noise-levels", type=float, nargs="+",
                    default=[0.1, 0.3, 0.6])
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()

    os.makedirs(args.out_dir, exist_ok=True)
    n = sum(CUMULATIVE_WIDTHS)
    edges = np.cumsum((0,) + CUMULATIVE_WIDTHS)

    for eps in args.noise_levels:
        out = os.path.join(args.out_dir, f"bounded_eps{eps:g}.csv")
        cfg = RunConfig(
            algorithm="tracker", generator="cumulative", m=args.m, n=n,
            d=args.d, noise="bounded", noise_level=eps,
            trials=args.trials, seed=args.seed, out=out,
        )
        cmd_run(cfg)
        trials = read_rows(out)
        sizes = [r["basis_size"] for r in trials if r["trial"] != "aggregate"]
        cols = read_rows(os.path.splitext(out)[0] + "_columns.csv")
        t = np.array([int(r["column"]) for r in cols])
        err = np.array([float(r["error"]) for r in cols])
        print(f"eps = {eps:g}  (basis sizes {sizes})")
        for b in range(len(CUMULATIVE_WIDTHS)):
            block = err[(t >= edges[b]) & (t < edges[b + 1])]
            print(f"  columns {edges[b]:4d}-{edges[b + 1] - 1:4d}  "
                  f"median error {np.median(block):.4f}")
        print(f"  -> {out}")


if __name__ == "__main__":
    main()
