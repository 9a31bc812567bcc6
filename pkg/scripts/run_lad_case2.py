#!/usr/bin/env python3
"""Desk-scale sparse-regression comparison, strongly convex case.

Seven variants: the strongly convex method with the conservative Case-1
penalty, its 5x oversized variant, the Case-2 schedule with c = 4, and the
accelerated fixed-step baseline at {0.01, 0.75, 1, 5} x (1/||K||).
"""

import sys

from nspd import bench


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "runs/lad-case2"
    spec = bench.ExperimentSpec(name="lad-case2", out_dir=out, check=True)
    report = bench.run_experiment(spec)
    for v in report["variants"]:
        print(f"{v['label']:<24} final={v['final_metric']:.3e} "
              f"slope={v['slope']}")
    return report["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
