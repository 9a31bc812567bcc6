#!/usr/bin/env python3
"""Desk-scale matrix game: non-stationary primal-dual vs smoothed gradient.

Five variants: the non-stationary method with c in {1, 2} and the smoothed
accelerated gradient with mu scaled by {0.2, 1, 5}.  Pass --epsilon to set
the smoothing target accuracy (default 1e-3).
"""

import argparse
import sys

from nspd import bench


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out", nargs="?", default="runs/game")
    ap.add_argument("--epsilon", type=float, default=1e-3)
    args = ap.parse_args()
    spec = bench.ExperimentSpec(name="game", out_dir=args.out, check=True,
                                epsilon=args.epsilon)
    report = bench.run_experiment(spec)
    for v in report["variants"]:
        print(f"{v['label']:<24} final={v['final_metric']:.3e} "
              f"slope={v['slope']}")
    return report["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
