#!/usr/bin/env python3
"""Desk-scale sparse-regression comparison, general convex case.

Eight variants: the non-stationary method with c in {1, 2}, the fixed-step
baseline with rho in {0.1, 1, 10} x rho0, and ADMM with rho in
{0.5, 10, 30} x rho0.  Traces and certificates land in the output directory.
"""

import sys

from nspd import bench


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "runs/lad-case1"
    spec = bench.ExperimentSpec(name="lad-case1", out_dir=out, check=True)
    report = bench.run_experiment(spec)
    for v in report["variants"]:
        print(f"{v['label']:<24} final={v['final_metric']:.3e} "
              f"slope={v['slope']}")
    return report["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
