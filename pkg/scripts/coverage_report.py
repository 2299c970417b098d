"""Build coverage sets for an environment at several resolutions and compare
them against the brute-force enumeration: entry counts, agreement, timing.

Usage:
    python3 scripts/coverage_report.py --env envs/bandit_interior_arm.json \
        --resolutions 2,5,10,20
"""
import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from pluralis import (
    GuardError,
    convex_coverage_set,
    enumerate_policies,
    load_momdp_file,
    pareto_set_bruteforce,
    simplex_grid,
)


def parse_args():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--env", default="envs/bandit_interior_arm.json")
    parser.add_argument("--resolutions", default="2,5,10,20")
    return parser.parse_args()


def main():
    args = parse_args()
    momdp = load_momdp_file(args.env)
    print(f"environment: {args.env}")
    print(f"states: {momdp.num_states}  objectives: {momdp.num_objectives}  "
          f"horizon: {momdp.horizon}")

    front_values = None
    try:
        t0 = time.perf_counter()
        front = pareto_set_bruteforce(momdp)
        front_time = time.perf_counter() - t0
        n_policies = len(enumerate_policies(momdp))
        print(f"enumerable policies: {n_policies}")
        print(f"\nbrute-force front: {len(front)} entries in {front_time:.3f}s")
        for entry in front.entries:
            print(f"  policy {entry.policy.id}: {np.round(entry.value, 6).tolist()}")
        front_values = front.values()
    except GuardError as exc:
        print(f"\nbrute-force front skipped ({exc})")

    header = f"\n{'resolution':>10s} {'entries':>8s} {'time':>8s}"
    if front_values is not None:
        header += f" {'on front':>9s} {'max shortfall':>14s}"
    print(header)
    for res_text in args.resolutions.split(","):
        resolution = int(res_text)
        t0 = time.perf_counter()
        ccs = convex_coverage_set(momdp, resolution)
        elapsed = time.perf_counter() - t0
        line = f"{resolution:>10d} {len(ccs):>8d} {elapsed:>7.3f}s"
        if front_values is not None:
            on_front = sum(
                1 for e in ccs.entries
                if np.abs(front_values - e.value).max(axis=1).min() <= 1e-9
            )
            grid = simplex_grid(resolution, momdp.num_objectives)
            best_on_set = (grid @ ccs.values().T).max(axis=1)
            best_anywhere = (grid @ front_values.T).max(axis=1)
            shortfall = float((best_anywhere - best_on_set).max())
            line += f" {on_front:>9d} {shortfall:>14.2e}"
        print(line)


if __name__ == "__main__":
    main()
