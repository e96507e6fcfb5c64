"""Run orchestration: validate, plan and mc-compare modes with artifacts.

Every mode writes a deterministic artifact set into an output directory
— identical scenario + seed produce byte-identical files — plus a
``timings.json`` that carries the wall-clock stage times and is the one
deliberately non-reproducible artifact.  Reports embed the scenario
hash and effective seed so any artifact can be traced to its inputs.
"""

from __future__ import annotations

import copy
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import PlanningError
from .geometry import check_tube_collision, overall_verdict
from .planner import TubeEvaluator, dynamic_informed_rrt_star
from .scenario import Scenario, parse_scenario
from .simcore import integrate_nominal, linearize, mc_ensemble
from .uncertainty import build_tube, propagate_covariance

__all__ = ["RunReport", "run_validate", "run_plan", "run_mc_compare"]


@dataclass
class RunReport:
    """Outcome summary of one run; ``timings_ms`` is kept out of report.json."""

    mode: str
    scenario_name: str
    scenario_hash: str
    seed: int
    beta: float
    verdict: str
    clearance: list[dict] = field(default_factory=list)
    extras: dict = field(default_factory=dict)
    timings_ms: dict = field(default_factory=dict)

    def to_dict(self, include_timings=False):
        out = {
            "mode": self.mode,
            "scenario_name": self.scenario_name,
            "scenario_hash": self.scenario_hash,
            "seed": self.seed,
            "beta": self.beta,
            "verdict": self.verdict,
            "clearance": self.clearance,
            "extras": self.extras,
        }
        if include_timings:
            out["timings_ms"] = self.timings_ms
        return out


# --------------------------------------------------------------------------
# deterministic writers


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def _write_json(path, obj):
    text = json.dumps(obj, sort_keys=True, indent=2, default=_json_default)
    Path(path).write_text(text + "\n", encoding="utf-8")


def _write_jsonl(path, records):
    lines = [json.dumps(rec, sort_keys=True, separators=(",", ":"),
                        default=_json_default) for rec in records]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""),
                          encoding="utf-8")


def _write_csv(path, header, columns):
    """Column-major CSV writer using repr() floats for exact round trips."""
    rows = np.column_stack(columns)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _finite_or_none(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _clearance_dicts(reports):
    out = []
    for r in reports:
        out.append({
            "obstacle_id": r.obstacle_id,
            "min_cstar2": _finite_or_none(r.min_cstar2),
            "argmin_t": _finite_or_none(r.argmin_t),
            "z_star": None if r.z_star is None
            else [float(v) for v in r.z_star],
            "c2": float(r.c2),
            "verdict": r.verdict,
        })
    return out


def _tube_records(tube):
    recs = []
    for k in range(len(tube)):
        recs.append({
            "t": float(tube.times[k]),
            "center": [float(v) for v in tube.centers[k]],
            "sigma": [float(v) for v in tube.sigmas[k].reshape(-1)],
            "c2": float(tube.c2),
        })
    return recs


def _with_overrides(scenario: Scenario, seed=None, beta=None) -> Scenario:
    if seed is None and beta is None:
        return scenario
    data = copy.deepcopy(scenario.data)
    if seed is not None:
        data["seed"] = int(seed)
    if beta is not None:
        data["beta"] = float(beta)
    return parse_scenario(data, source=scenario.source)


def _prepare(scenario: Scenario):
    model = scenario.build_model()
    profile = scenario.build_profile()
    grid = scenario.grid()
    x0 = scenario.initial_state(model, profile)
    P0 = scenario.initial_covariance(model)
    return model, profile, grid, x0, P0


# --------------------------------------------------------------------------
# modes


def run_validate(scenario: Scenario, out_dir, *, stride=1, seed=None,
                 beta=None) -> RunReport:
    """Propagate the tube along the scenario trajectory and check obstacles.

    Writes nominal.csv, variances.csv, tube.jsonl, report.json and
    timings.json into ``out_dir``.
    """
    sc = _with_overrides(scenario, seed=seed, beta=beta)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model, profile, grid, x0, P0 = _prepare(sc)
    obstacles = sc.build_obstacles()

    timings = {}
    tic = time.perf_counter()
    nominal = integrate_nominal(model, x0, profile, grid)
    timings["nominal_ms"] = 1e3 * (time.perf_counter() - tic)
    tic = time.perf_counter()
    lin = linearize(model, nominal, profile)
    timings["linearize_ms"] = 1e3 * (time.perf_counter() - tic)
    tic = time.perf_counter()
    cov = propagate_covariance(lin, P0)
    timings["covariance_ms"] = 1e3 * (time.perf_counter() - tic)
    tic = time.perf_counter()
    tube = build_tube(nominal, cov, sc.beta,
                      position_rows=model.position_rows)
    timings["tube_ms"] = 1e3 * (time.perf_counter() - tic)
    timings["lc_ms"] = (timings["linearize_ms"] + timings["covariance_ms"]
                        + timings["tube_ms"])
    tic = time.perf_counter()
    reports = check_tube_collision(tube, obstacles, stride=stride)
    timings["collision_ms"] = 1e3 * (time.perf_counter() - tic)

    times = grid.times()
    labels = list(model.state_labels)
    _write_csv(out / "nominal.csv", ["t"] + labels,
               [times] + [nominal.states[:, i] for i in range(len(labels))])
    variances = np.diagonal(cov.P, axis1=1, axis2=2)
    _write_csv(out / "variances.csv", ["t"] + [f"var_{s}" for s in labels],
               [times] + [variances[:, i] for i in range(len(labels))])
    _write_jsonl(out / "tube.jsonl", _tube_records(tube))

    report = RunReport(
        mode="validate", scenario_name=sc.name, scenario_hash=sc.hash(),
        seed=sc.seed, beta=sc.beta,
        verdict=overall_verdict(reports),
        clearance=_clearance_dicts(reports),
        extras={"stride": int(stride), "grid_points": grid.count,
                "c2": float(tube.c2)},
        timings_ms=timings)
    _write_json(out / "report.json", report.to_dict())
    _write_json(out / "timings.json", timings)
    return report


def run_plan(scenario: Scenario, out_dir, *, seed=None, beta=None) -> RunReport:
    """Plan a chance-constrained path and post-check it against obstacles.

    Writes path.csv, tube.jsonl, buffers.json, tree.jsonl, report.json
    and timings.json.  Raises PlanningError when no path is found (the
    report and artifacts are still written for diagnosis).
    """
    sc = _with_overrides(scenario, seed=seed, beta=beta)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model = sc.build_model()
    grid = sc.grid()
    P0 = sc.initial_covariance(model)
    obstacles = sc.build_obstacles()
    cfg = sc.build_planner_config()
    start, goal = sc.planner_endpoints()
    explicit_x0 = None
    if sc.data["initial_state"] != "auto":
        explicit_x0 = np.asarray(sc.data["initial_state"], dtype=float)
    evaluator = TubeEvaluator(
        model=model, dt=grid.dt, beta=sc.beta,
        P0=P0 if np.any(P0) else None,
        initial_state=explicit_x0, fd_step=grid.dt)
    rng = np.random.default_rng(sc.seed)

    timings = {}
    tic = time.perf_counter()
    result = dynamic_informed_rrt_star(start, goal, obstacles, cfg,
                                       evaluator, rng)
    timings["plan_ms"] = 1e3 * (time.perf_counter() - tic)

    _write_json(out / "buffers.json", result.buffer_history)
    if result.tree is not None:
        _write_jsonl(out / "tree.jsonl", result.tree.to_records())
    extras = {
        "cost_history": [_finite_or_none(c) for c in result.cost_history],
        "outer_iterations": result.outer_iterations,
        "solved": result.solved,
        "c2": float(evaluator.c2),
    }
    if result.solved:
        path = result.path
        extras["path_length"] = float(
            np.sum(np.linalg.norm(np.diff(path, axis=0), axis=1)))
        extras["waypoints"] = len(path)
        _write_csv(out / "path.csv", ["x", "y"],
                   [path[:, 0], path[:, 1]])
        _write_jsonl(out / "tube.jsonl", _tube_records(result.tube))
        verdict = overall_verdict(result.reports)
    else:
        extras["message"] = result.message
        verdict = "error"

    report = RunReport(
        mode="plan", scenario_name=sc.name, scenario_hash=sc.hash(),
        seed=sc.seed, beta=sc.beta, verdict=verdict,
        clearance=_clearance_dicts(result.reports),
        extras=extras, timings_ms=timings)
    _write_json(out / "report.json", report.to_dict())
    _write_json(out / "timings.json", timings)
    return report


def run_mc_compare(scenario: Scenario, out_dir, *, runs=10000, seed=None,
                   record_indices=None) -> RunReport:
    """Compare propagated variances against a Monte Carlo ensemble.

    Writes lc_variances.csv, mc_variances.csv, deviation.json,
    report.json and timings.json.  The deviation metric per channel is
    the maximum over time of |lc - mc| / mc restricted to instants where
    the MC variance is at least 5% of that channel's peak; channels
    whose MC variance is identically zero are flagged degenerate.
    """
    if runs < 100:
        raise ValueError("mc-compare needs runs >= 100")
    sc = _with_overrides(scenario, seed=seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model, profile, grid, x0, P0 = _prepare(sc)

    timings = {}
    tic = time.perf_counter()
    nominal = integrate_nominal(model, x0, profile, grid)
    lin = linearize(model, nominal, profile)
    cov = propagate_covariance(lin, P0)
    timings["lc_ms"] = 1e3 * (time.perf_counter() - tic)
    tic = time.perf_counter()
    mc_mean, mc_cov = mc_ensemble(model, x0, profile, grid, runs=runs,
                                  base_seed=sc.seed)
    timings["mc_ms"] = 1e3 * (time.perf_counter() - tic)

    lc_var = np.diagonal(cov.P, axis1=1, axis2=2)
    mc_var = np.diagonal(mc_cov.P, axis1=1, axis2=2)
    labels = list(model.state_labels)
    channels = {}
    pos_max = 0.0
    for i, label in enumerate(labels):
        peak = float(np.max(mc_var[:, i]))
        if peak <= 0.0:
            channels[label] = {"max_rel_dev": None, "degenerate": True}
            continue
        mask = mc_var[:, i] >= 0.05 * peak
        rel = np.abs(lc_var[mask, i] - mc_var[mask, i]) / mc_var[mask, i]
        dev = float(np.max(rel))
        channels[label] = {"max_rel_dev": dev, "degenerate": False}
        if i in model.position_rows:
            pos_max = max(pos_max, dev)

    times = grid.times()
    _write_csv(out / "lc_variances.csv",
               ["t"] + [f"var_{s}" for s in labels],
               [times] + [lc_var[:, i] for i in range(len(labels))])
    _write_csv(out / "mc_variances.csv",
               ["t"] + [f"var_{s}" for s in labels],
               [times] + [mc_var[:, i] for i in range(len(labels))])
    deviation = {"channels": channels,
                 "position_max_rel_dev": pos_max,
                 "runs": int(runs)}
    _write_json(out / "deviation.json", deviation)

    report = RunReport(
        mode="mc-compare", scenario_name=sc.name, scenario_hash=sc.hash(),
        seed=sc.seed, beta=sc.beta, verdict="none",
        clearance=[],
        extras=deviation,
        timings_ms=timings)
    _write_json(out / "report.json", report.to_dict())
    _write_json(out / "timings.json", timings)
    return report
