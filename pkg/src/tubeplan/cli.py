"""Command-line entry point.

Subcommands
-----------
validate    propagate the uncertainty tube along a scenario trajectory
            and report per-obstacle clearance verdicts
plan        grow a chance-constrained path with the dynamic informed
            RRT* and post-check it against the true obstacles
mc-compare  compare propagated variances against a Monte Carlo ensemble

Exit codes: 0 = clear / success, 2 = collision detected, 1 = any error
(bad scenario, infeasible planning problem, numerical failure).

Randomness: run ``i`` of a Monte Carlo ensemble draws from its own
Philox(base_seed + i) stream and reductions use a fixed chunk order, so
a given scenario + seed reproduces byte-identical artifacts.  The
planner consumes a single default_rng(seed) stream.  Wall-clock stage
times go to timings.json; every other artifact is deterministic.
"""

from __future__ import annotations

import argparse
import sys

from .errors import (ActiveSetError, BracketError, InfeasibleRegionError,
                     ModelDomainError, PlanningError, ScenarioError)
from .runner import run_mc_compare, run_plan, run_validate
from .scenario import load_scenario

_ERRORS = (ScenarioError, PlanningError, ModelDomainError,
           InfeasibleRegionError, ActiveSetError, BracketError,
           ValueError, OSError)


def _add_common(sub):
    sub.add_argument("--scenario", required=True, metavar="PATH",
                     help="scenario JSON file")
    sub.add_argument("--out", required=True, metavar="DIR",
                     help="directory for artifacts (created if missing)")
    sub.add_argument("--seed", type=int, default=None,
                     help="override the scenario seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tubeplan",
        description="Flight-plan validation and chance-constrained "
                    "planning under wind-gust uncertainty.",
        epilog=(
            "exit codes:\n"
            "  0  clear / success\n"
            "  2  collision detected\n"
            "  1  error (bad scenario, planning failure, numerics)\n\n"
            "randomness: Monte Carlo run i uses its own "
            "Philox(seed + i) stream with a fixed reduction order; the\n"
            "planner uses one default_rng(seed) stream.  All artifacts "
            "except timings.json are byte-reproducible."),
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_val = sub.add_parser(
        "validate", help="propagate the tube and check obstacle clearance")
    _add_common(p_val)
    p_val.add_argument("--beta", type=float, default=None,
                       help="override the confidence level")
    p_val.add_argument("--stride", type=int, default=1,
                       help="check every k-th tube sample (default 1)")

    p_plan = sub.add_parser(
        "plan", help="plan a path whose uncertainty tube clears obstacles")
    _add_common(p_plan)
    p_plan.add_argument("--beta", type=float, default=None,
                        help="override the confidence level")

    p_mc = sub.add_parser(
        "mc-compare", help="Monte Carlo check of the propagated variances")
    _add_common(p_mc)
    p_mc.add_argument("--runs", type=int, default=10000,
                      help="ensemble size, at least 100 (default 10000)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = load_scenario(args.scenario)
        if args.command == "validate":
            if args.stride < 1:
                raise ValueError("--stride must be >= 1")
            report = run_validate(scenario, args.out, stride=args.stride,
                                  seed=args.seed, beta=args.beta)
        elif args.command == "plan":
            report = run_plan(scenario, args.out, seed=args.seed,
                              beta=args.beta)
        else:
            report = run_mc_compare(scenario, args.out, runs=args.runs,
                                    seed=args.seed)
    except _ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    print(f"scenario: {report.scenario_name}  "
          f"hash: {report.scenario_hash[:12]}  seed: {report.seed}")
    for entry in report.clearance:
        c2 = entry["min_cstar2"]
        shown = "inf" if c2 is None else f"{c2:.4f}"
        print(f"  obstacle {entry['obstacle_id']}: min c*^2 = {shown} "
              f"(threshold {entry['c2']:.4f}) -> {entry['verdict']}")
    if report.mode == "mc-compare":
        dev = report.extras["position_max_rel_dev"]
        print(f"  position max relative deviation: {dev:.4f} "
              f"over {report.extras['runs']} runs")
    print(f"verdict: {report.verdict}  artifacts: {args.out}")
    if report.verdict == "error":
        print(f"error: {report.extras.get('message', 'planning failed')}",
              file=sys.stderr)
        return 1
    return 2 if report.verdict == "collide" else 0


if __name__ == "__main__":
    sys.exit(main())
