"""Scenario files: schema, validation, normalization and hashing.

A scenario is a single JSON document (SI units, radians unless a key
says ``_deg``) that fully determines a run: vehicle and parameters, time
grid, initial state and covariance, desired trajectory or planner
problem, obstacles, confidence level and RNG seed.  Parsing is strict —
unknown keys and malformed fields raise ScenarioError with the offending
field path — and normalization is canonical, so the round trip
parse -> serialize -> parse is the identity and the scenario hash is
stable across platforms.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ScenarioError
from .geometry import CuboidObstacle
from .planner import Bounds, PlannerConfig
from .simcore import TimeGrid
from .vehicles import (
    FixedWingModel,
    FixedWingParams,
    FixedWingPolylineProfile,
    LateralSinusoidProfile,
    PolylineProfile3D,
    QuadrotorModel,
    QuadrotorParams,
    ascent_cruise_descent,
)

__all__ = ["Scenario", "load_scenario", "parse_scenario", "scenario_hash",
           "SCHEMA_VERSION"]

SCHEMA_VERSION = 1

_TOP_KEYS = {"schema_version", "name", "seed", "beta", "vehicle", "grid",
             "initial_state", "initial_covariance", "desired_trajectory",
             "obstacles", "planner"}
_VEHICLE_KEYS = {"type", "params"}
_GRID_KEYS = {"t0", "tf", "dt"}
_PLANNER_KEYS = {"bounds", "start", "goal", "altitude", "cruise_speed",
                 "N_max", "N_conv", "M", "tol", "step", "r_w",
                 "goal_radius", "goal_bias"}

_QUAD_PARAM_KEYS = {"m", "rho", "S", "C_D", "K", "Lam", "sigma", "L"}
_FW_PARAM_KEYS = {"m", "g", "rho", "S", "C_D0", "K_d", "kappa_mu",
                  "kappa_CL", "kappa_T1", "kappa_T2", "kappa", "Lam_f",
                  "sigma_u", "sigma_w", "sigma_v", "L_u", "L_w", "L_v"}

_PROFILES = {
    "quadrotor": {"ascent-cruise-descent", "waypoints"},
    "fixedwing": {"lateral-sinusoid", "waypoints"},
}


def _fail(path, msg):
    raise ScenarioError(f"{path}: {msg}")


def _require(cond, path, msg):
    if not cond:
        _fail(path, msg)


def _check_keys(obj, allowed, path):
    _require(isinstance(obj, dict), path, "must be an object")
    unknown = set(obj) - allowed
    if unknown:
        _fail(path, f"unknown key(s) {sorted(unknown)}")


def _number(obj, path, *, positive=False, nonnegative=False):
    _require(isinstance(obj, (int, float)) and not isinstance(obj, bool),
             path, "must be a number")
    v = float(obj)
    _require(math.isfinite(v), path, "must be finite")
    if positive:
        _require(v > 0.0, path, "must be positive")
    if nonnegative:
        _require(v >= 0.0, path, "must be nonnegative")
    return v


def _vector(obj, path, length=None):
    _require(isinstance(obj, list), path, "must be a list of numbers")
    out = [_number(v, f"{path}[{i}]") for i, v in enumerate(obj)]
    if length is not None:
        _require(len(out) == length, path, f"must have length {length}")
    return out


def _gain_matrix(obj, path, size):
    """Scalar -> scaled identity, list -> diagonal, nested list -> matrix."""
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return (_number(obj, path) * np.eye(size)).tolist()
    _require(isinstance(obj, list) and len(obj) == size, path,
             f"must be a scalar, a {size}-list or a {size}x{size} matrix")
    if all(isinstance(v, (int, float)) and not isinstance(v, bool)
           for v in obj):
        return np.diag(_vector(obj, path, size)).tolist()
    return [_vector(row, f"{path}[{i}]", size) for i, row in enumerate(obj)]


def _per_axis(obj, path, *, positive=False, nonnegative=False):
    """Scalar -> three copies, or an explicit 3-list."""
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        v = _number(obj, path, positive=positive, nonnegative=nonnegative)
        return [v, v, v]
    vec = _vector(obj, path, 3)
    for i, v in enumerate(vec):
        _number(v, f"{path}[{i}]", positive=positive,
                nonnegative=nonnegative)
    return vec


@dataclass
class Scenario:
    """Normalized scenario; ``data`` is the canonical dict form."""

    data: dict
    source: str = "<dict>"

    # -- accessors ---------------------------------------------------------

    @property
    def name(self):
        return self.data["name"]

    @property
    def seed(self):
        return self.data["seed"]

    @property
    def beta(self):
        return self.data["beta"]

    @property
    def vehicle(self):
        return self.data["vehicle"]["type"]

    def grid(self):
        g = self.data["grid"]
        return TimeGrid(g["t0"], g["tf"], g["dt"])

    def build_model(self):
        overrides = self.data["vehicle"]["params"]
        if self.vehicle == "quadrotor":
            return QuadrotorModel(QuadrotorParams(**{
                k: np.asarray(v, dtype=float) if isinstance(v, list) else v
                for k, v in overrides.items()}))
        return FixedWingModel(FixedWingParams(**{
            k: np.asarray(v, dtype=float) if isinstance(v, list) else v
            for k, v in overrides.items()}))

    def build_profile(self):
        spec = self.data["desired_trajectory"]
        if spec is None:
            _fail("desired_trajectory", "required for this mode")
        kind = spec["profile"]
        dt = self.data["grid"]["dt"]
        if kind == "ascent-cruise-descent":
            return ascent_cruise_descent(
                spec["start_xy"], spec["heading_deg"],
                start_altitude=spec["start_altitude"],
                cruise_altitude=spec["cruise_altitude"],
                cruise_distance=spec["cruise_distance"],
                final_altitude=spec["final_altitude"],
                climb_rate=spec["climb_rate"],
                cruise_speed=spec["cruise_speed"],
                descent_rate=spec["descent_rate"])
        if kind == "lateral-sinusoid":
            return LateralSinusoidProfile(
                cruise_speed=spec["cruise_speed"],
                amplitude=spec["amplitude"], period=spec["period"],
                altitude=spec["altitude"], fd_step=dt,
                origin=spec["origin"])
        if self.vehicle == "quadrotor":
            return PolylineProfile3D(spec["points"], spec["speed"])
        return FixedWingPolylineProfile(spec["points"], spec["altitude"],
                                        spec["speed"], fd_step=dt)

    def build_obstacles(self):
        out = []
        for entry in self.data["obstacles"]:
            if "box" in entry:
                box = entry["box"]
                out.append(CuboidObstacle.from_box(
                    box["center"], box["half_extents"], yaw=box["yaw"],
                    id=entry["id"]))
            else:
                hs = entry["halfspaces"]
                out.append(CuboidObstacle(
                    A=np.asarray(hs["A"], dtype=float),
                    b=np.asarray(hs["b"], dtype=float), id=entry["id"]))
        return out

    def build_planner_config(self):
        p = self.data["planner"]
        if p is None:
            _fail("planner", "required for plan mode")
        bounds = Bounds(lo=tuple(p["bounds"]["lo"]),
                        hi=tuple(p["bounds"]["hi"]))
        return PlannerConfig(
            bounds=bounds, altitude=p["altitude"],
            cruise_speed=p["cruise_speed"], N_max=p["N_max"],
            N_conv=p["N_conv"], M=p["M"], tol=p["tol"], step=p["step"],
            r_w=p["r_w"], goal_radius=p["goal_radius"],
            goal_bias=p["goal_bias"])

    def planner_endpoints(self):
        p = self.data["planner"]
        if p is None:
            _fail("planner", "required for plan mode")
        return (np.asarray(p["start"], dtype=float),
                np.asarray(p["goal"], dtype=float))

    def initial_covariance(self, model):
        spec = self.data["initial_covariance"]
        if spec == "zero":
            return np.zeros((model.n_states, model.n_states))
        diag = np.asarray(spec, dtype=float)
        if diag.shape != (model.n_states,):
            _fail("initial_covariance",
                  f"diagonal must have length {model.n_states}")
        return np.diag(diag)

    def initial_state(self, model, profile):
        """Explicit initial state, or one synthesized from the profile."""
        spec = self.data["initial_state"]
        if spec != "auto":
            x0 = np.asarray(spec, dtype=float)
            if x0.shape != (model.n_states,):
                _fail("initial_state",
                      f"must have length {model.n_states}")
            return x0
        t0 = self.data["grid"]["t0"]
        ref = profile(t0)
        if model.name == "quadrotor":
            x0 = np.zeros(model.n_states)
            x0[0:3] = ref.r
            x0[3:6] = ref.rdot
            return x0
        speed = float(np.linalg.norm(ref.etadot))
        heading = math.atan2(ref.etadot[1], ref.etadot[0])
        return model.trim_state(ref.eta, ref.h, speed, heading)

    # -- serialization -----------------------------------------------------

    def to_dict(self):
        return json.loads(self.canonical_json())

    def canonical_json(self):
        return json.dumps(self.data, sort_keys=True, indent=2)

    def hash(self):
        payload = json.dumps(self.data, sort_keys=True,
                             separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def scenario_hash(scenario: Scenario) -> str:
    return scenario.hash()


# --------------------------------------------------------------------------
# parsing


def _parse_vehicle(obj):
    _check_keys(obj, _VEHICLE_KEYS, "vehicle")
    vtype = obj.get("type")
    _require(vtype in ("quadrotor", "fixedwing"), "vehicle.type",
             "must be 'quadrotor' or 'fixedwing'")
    raw = obj.get("params", {})
    allowed = _QUAD_PARAM_KEYS if vtype == "quadrotor" else _FW_PARAM_KEYS
    _check_keys(raw, allowed, "vehicle.params")
    params = {}
    for key, val in raw.items():
        path = f"vehicle.params.{key}"
        if key in ("K", "Lam"):
            params[key] = _gain_matrix(val, path, 3)
        elif key == "Lam_f":
            params[key] = _gain_matrix(val, path, 2)
        elif key in ("sigma", "L"):
            params[key] = _per_axis(val, path, nonnegative=(key == "sigma"),
                                    positive=(key == "L"))
        else:
            params[key] = _number(val, path)
    return {"type": vtype, "params": dict(sorted(params.items()))}


def _parse_grid(obj):
    _check_keys(obj, _GRID_KEYS, "grid")
    t0 = _number(obj.get("t0", 0.0), "grid.t0", nonnegative=True)
    _require("tf" in obj, "grid.tf", "is required")
    _require("dt" in obj, "grid.dt", "is required")
    tf = _number(obj["tf"], "grid.tf", positive=True)
    dt = _number(obj["dt"], "grid.dt", positive=True)
    _require(tf > t0, "grid.tf", "must exceed grid.t0")
    _require((tf - t0) / dt >= 1.0, "grid.dt", "grid must have >= 2 points")
    return {"t0": t0, "tf": tf, "dt": dt}


def _parse_profile(obj, vehicle):
    _require(isinstance(obj, dict), "desired_trajectory", "must be an object")
    kind = obj.get("profile")
    _require(kind in _PROFILES[vehicle], "desired_trajectory.profile",
             f"must be one of {sorted(_PROFILES[vehicle])} for {vehicle}")
    path = "desired_trajectory"
    if kind == "ascent-cruise-descent":
        keys = {"profile", "start_xy", "heading_deg", "start_altitude",
                "cruise_altitude", "cruise_distance", "final_altitude",
                "climb_rate", "cruise_speed", "descent_rate"}
        _check_keys(obj, keys, path)
        out = {"profile": kind,
               "start_xy": _vector(obj.get("start_xy", [0.0, 0.0]),
                                   f"{path}.start_xy", 2),
               "heading_deg": _number(obj.get("heading_deg", 0.0),
                                      f"{path}.heading_deg")}
        for key in ("start_altitude", "cruise_altitude", "cruise_distance",
                    "final_altitude", "climb_rate", "cruise_speed",
                    "descent_rate"):
            _require(key in obj, f"{path}.{key}", "is required")
            positive = key not in ("start_altitude", "final_altitude")
            out[key] = _number(obj[key], f"{path}.{key}", positive=positive)
        return dict(sorted(out.items()))
    if kind == "lateral-sinusoid":
        keys = {"profile", "cruise_speed", "amplitude", "period",
                "altitude", "origin"}
        _check_keys(obj, keys, path)
        out = {"profile": kind,
               "origin": _vector(obj.get("origin", [0.0, 0.0]),
                                 f"{path}.origin", 2)}
        for key, positive in (("cruise_speed", True), ("amplitude", False),
                              ("period", True), ("altitude", True)):
            _require(key in obj, f"{path}.{key}", "is required")
            out[key] = _number(obj[key], f"{path}.{key}", positive=positive)
        return dict(sorted(out.items()))
    # waypoints
    keys = {"profile", "points", "speed"}
    if vehicle == "fixedwing":
        keys.add("altitude")
    _check_keys(obj, keys, path)
    pts = obj.get("points")
    _require(isinstance(pts, list) and len(pts) >= 2, f"{path}.points",
             "must list at least two waypoints")
    dim = 3 if vehicle == "quadrotor" else 2
    points = [_vector(p, f"{path}.points[{i}]", dim)
              for i, p in enumerate(pts)]
    speed = obj.get("speed")
    if isinstance(speed, list):
        speed = _vector(speed, f"{path}.speed", len(points) - 1)
        for i, v in enumerate(speed):
            _require(v > 0.0, f"{path}.speed[{i}]", "must be positive")
    else:
        speed = _number(speed, f"{path}.speed", positive=True)
    out = {"profile": kind, "points": points, "speed": speed}
    if vehicle == "fixedwing":
        out["altitude"] = _number(obj.get("altitude"), f"{path}.altitude",
                                  positive=True)
    return dict(sorted(out.items()))


def _parse_obstacles(obj):
    _require(isinstance(obj, list), "obstacles", "must be a list")
    out = []
    seen = set()
    for k, entry in enumerate(obj):
        path = f"obstacles[{k}]"
        _require(isinstance(entry, dict), path, "must be an object")
        has_box = "box" in entry
        has_hs = "halfspaces" in entry
        _require(has_box != has_hs, path,
                 "needs exactly one of 'box' or 'halfspaces'")
        _check_keys(entry, {"id", "box", "halfspaces"}, path)
        oid = entry.get("id", f"obstacle-{k}")
        _require(isinstance(oid, str) and oid, f"{path}.id",
                 "must be a nonempty string")
        _require(oid not in seen, f"{path}.id", f"duplicate id {oid!r}")
        seen.add(oid)
        if has_box:
            box = entry["box"]
            _check_keys(box, {"center", "half_extents", "yaw"}, f"{path}.box")
            parsed = {
                "center": _vector(box.get("center"), f"{path}.box.center", 3),
                "half_extents": _vector(box.get("half_extents"),
                                        f"{path}.box.half_extents", 3),
                "yaw": _number(box.get("yaw", 0.0), f"{path}.box.yaw"),
            }
            for i, h in enumerate(parsed["half_extents"]):
                _require(h > 0.0, f"{path}.box.half_extents[{i}]",
                         "must be positive")
            out.append({"id": oid, "box": parsed})
        else:
            hs = entry["halfspaces"]
            _check_keys(hs, {"A", "b"}, f"{path}.halfspaces")
            A = hs.get("A")
            _require(isinstance(A, list) and len(A) >= 4,
                     f"{path}.halfspaces.A", "must list >= 4 rows")
            rows = [_vector(r, f"{path}.halfspaces.A[{i}]", 3)
                    for i, r in enumerate(A)]
            b = _vector(hs.get("b"), f"{path}.halfspaces.b", len(rows))
            out.append({"id": oid, "halfspaces": {"A": rows, "b": b}})
    return out


def _parse_planner(obj):
    if obj is None:
        return None
    _check_keys(obj, _PLANNER_KEYS, "planner")
    for key in ("bounds", "start", "goal", "altitude", "cruise_speed"):
        _require(key in obj, f"planner.{key}", "is required")
    bounds = obj["bounds"]
    _check_keys(bounds, {"lo", "hi"}, "planner.bounds")
    lo = _vector(bounds.get("lo"), "planner.bounds.lo", 2)
    hi = _vector(bounds.get("hi"), "planner.bounds.hi", 2)
    _require(all(a < b for a, b in zip(lo, hi)), "planner.bounds",
             "must satisfy lo < hi componentwise")
    start = _vector(obj["start"], "planner.start", 2)
    goal = _vector(obj["goal"], "planner.goal", 2)
    for label, q in (("start", start), ("goal", goal)):
        inside = all(l <= v <= h for v, l, h in zip(q, lo, hi))
        _require(inside, f"planner.{label}", "must lie inside the bounds")
    out = {
        "bounds": {"lo": lo, "hi": hi}, "start": start, "goal": goal,
        "altitude": _number(obj["altitude"], "planner.altitude",
                            positive=True),
        "cruise_speed": _number(obj["cruise_speed"], "planner.cruise_speed",
                                positive=True),
        "N_max": int(_number(obj.get("N_max", 3000), "planner.N_max",
                             positive=True)),
        "N_conv": int(_number(obj.get("N_conv", 200), "planner.N_conv",
                              positive=True)),
        "M": int(_number(obj.get("M", 4), "planner.M", positive=True)),
        "tol": _number(obj.get("tol", 0.01), "planner.tol", positive=True),
        "step": (None if obj.get("step") is None
                 else _number(obj["step"], "planner.step", positive=True)),
        "r_w": (None if obj.get("r_w") is None
                else _number(obj["r_w"], "planner.r_w", positive=True)),
        "goal_radius": _number(obj.get("goal_radius", 1.0),
                               "planner.goal_radius", positive=True),
        "goal_bias": _number(obj.get("goal_bias", 0.05),
                             "planner.goal_bias", nonnegative=True),
    }
    _require(out["goal_bias"] <= 0.2, "planner.goal_bias",
             "must not exceed 0.2")
    return dict(sorted(out.items()))


def parse_scenario(raw, source="<dict>") -> Scenario:
    """Validate a raw dict against the schema and normalize it."""
    _check_keys(raw, _TOP_KEYS, "scenario")
    version = raw.get("schema_version")
    _require(version == SCHEMA_VERSION, "schema_version",
             f"must be {SCHEMA_VERSION}")
    name = raw.get("name", "unnamed")
    _require(isinstance(name, str) and name, "name",
             "must be a nonempty string")
    seed = raw.get("seed", 0)
    _require(isinstance(seed, int) and not isinstance(seed, bool)
             and seed >= 0, "seed", "must be a nonnegative integer")
    beta = _number(raw.get("beta", 0.999), "beta")
    _require(0.0 < beta < 1.0, "beta", "must lie strictly inside (0, 1)")
    _require("vehicle" in raw, "vehicle", "is required")
    _require("grid" in raw, "grid", "is required")
    vehicle = _parse_vehicle(raw["vehicle"])
    data = {
        "schema_version": SCHEMA_VERSION,
        "name": name,
        "seed": seed,
        "beta": beta,
        "vehicle": vehicle,
        "grid": _parse_grid(raw["grid"]),
        "initial_state": raw.get("initial_state", "auto"),
        "initial_covariance": raw.get("initial_covariance", "zero"),
        "desired_trajectory": (
            None if raw.get("desired_trajectory") is None
            else _parse_profile(raw["desired_trajectory"],
                                vehicle["type"])),
        "obstacles": _parse_obstacles(raw.get("obstacles", [])),
        "planner": _parse_planner(raw.get("planner")),
    }
    ist = data["initial_state"]
    if ist != "auto":
        _require(isinstance(ist, list), "initial_state",
                 "must be 'auto' or a list of numbers")
        data["initial_state"] = _vector(ist, "initial_state")
    icov = data["initial_covariance"]
    if icov != "zero":
        _require(isinstance(icov, list), "initial_covariance",
                 "must be 'zero' or a diagonal list")
        data["initial_covariance"] = [
            _number(v, f"initial_covariance[{i}]", nonnegative=True)
            for i, v in enumerate(icov)]
    scenario = Scenario(data=data, source=source)
    # construction-level validation (dimensions, geometry, feasibility)
    model = scenario.build_model()
    scenario.initial_covariance(model)
    if data["initial_state"] != "auto":
        _require(len(data["initial_state"]) == model.n_states,
                 "initial_state", f"must have length {model.n_states}")
    scenario.build_obstacles()
    if data["planner"] is not None:
        scenario.build_planner_config()
    if data["desired_trajectory"] is not None:
        scenario.build_profile()
    return scenario


def load_scenario(path) -> Scenario:
    """Parse a scenario JSON file with field-level diagnostics."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"{path}: invalid JSON at line {exc.lineno}, column "
            f"{exc.colno}: {exc.msg}") from exc
    try:
        return parse_scenario(raw, source=str(path))
    except ScenarioError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc
