#!/usr/bin/env python
"""Run the dynamic planner demo and print buffer/cost evolution."""

import argparse
import json
from pathlib import Path

from tubeplan import load_scenario, run_plan

REPO = Path(__file__).resolve().parents[1]
SCENARIO = REPO / "scenarios" / "quadrotor_three_obstacles.json"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=REPO / "artifacts" / "plan-demo",
                        help="artifact directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the scenario seed")
    args = parser.parse_args()

    scenario = load_scenario(SCENARIO)
    report = run_plan(scenario, args.out, seed=args.seed)
    print(f"{report.scenario_name}: verdict={report.verdict} "
          f"({report.timings_ms['plan_ms']:.0f} ms)")
    buffers = json.loads((Path(args.out) / "buffers.json").read_text())
    for k, snap in enumerate(buffers):
        row = ", ".join(f"{oid}={val:.3f}" for oid, val in sorted(snap.items()))
        print(f"  round {k}: buffers {row}")
    costs = report.extras["cost_history"]
    print("  best cost per round: "
          + ", ".join("inf" if c is None else f"{c:.2f}" for c in costs))
    if report.verdict != "error":
        print(f"  path length {report.extras['path_length']:.2f} m over "
              f"{report.extras['waypoints']} waypoints")
    for entry in report.clearance:
        c2 = entry["min_cstar2"]
        shown = "inf" if c2 is None else f"{c2:.3f}"
        print(f"  {entry['obstacle_id']}: min c*^2 = {shown} "
              f"(threshold {entry['c2']:.3f}) -> {entry['verdict']}")
    print(f"  artifacts: {args.out}")


if __name__ == "__main__":
    main()
