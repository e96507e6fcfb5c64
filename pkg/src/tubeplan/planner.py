"""Chance-constrained path planning in the constant-altitude plane.

The inner planner is an informed RRT*: once a first solution exists,
samples are drawn only from the ellipse of points that could shorten it,
and both a choose-parent pass and a rewiring pass keep the tree
asymptotically optimal.  Obstacles enter the planner as their buffered
constant-altitude cross-sections.

The outer loop makes the plan chance-constrained.  Each round it
propagates the closed-loop state covariance along the current best path,
measures how far the resulting probability tube is from touching each
true obstacle (``buffer_touch_distance``), and shifts the obstacle
buffers by exactly that amount, so buffers contract toward the size at
which the tube is tangent to the true obstacle.  A buffer that grows
invalidates part of the tree; those nodes are removed and the stranded
subtrees are either reconnected through fresh samples or pruned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PlanningError
from .geometry import buffer_touch_distance, check_tube_collision
from .simcore import TimeGrid, integrate_nominal, linearize
from .uncertainty import Tube, build_tube, chi2_quantile, propagate_covariance
from .vehicles import FixedWingPolylineProfile, PolylineProfile3D

__all__ = [
    "Bounds",
    "PlannerConfig",
    "PlanNode",
    "PlanTree",
    "sample_ellipse",
    "no_collision_2d",
    "add_node",
    "informed_rrt_star",
    "TubeEvaluator",
    "comp_obs_dist",
    "cleanup_and_regrow",
    "dynamic_informed_rrt_star",
    "path_to_trajectory",
    "PlanResult",
]

_ROOT = -1
_ORPHAN = -3
_UNUSED = -2


@dataclass(frozen=True)
class Bounds:
    """Axis-aligned sampling rectangle for the planner."""

    lo: tuple[float, float]
    hi: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        if len(self.lo) != 2 or len(self.hi) != 2:
            raise ValueError("bounds must be 2D")
        if not all(l < h for l, h in zip(self.lo, self.hi)):
            raise ValueError("bounds must satisfy lo < hi componentwise")

    def contains(self, q):
        return bool(np.all(np.asarray(q) >= np.asarray(self.lo) - 1e-12)
                    and np.all(np.asarray(q) <= np.asarray(self.hi) + 1e-12))

    def diagonal(self):
        return float(np.linalg.norm(np.asarray(self.hi) - np.asarray(self.lo)))

    def sample(self, rng):
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return lo + rng.random(2) * (hi - lo)


@dataclass
class PlannerConfig:
    """Tuning knobs of the planner; unset step/r_w derive from the bounds."""

    bounds: Bounds
    altitude: float
    cruise_speed: float
    N_max: int = 3000
    N_conv: int = 200
    M: int = 4
    tol: float = 0.01
    step: float | None = None
    r_w: float | None = None
    goal_radius: float = 1.0
    goal_bias: float = 0.05

    def __post_init__(self):
        if self.step is None:
            self.step = self.bounds.diagonal() / 50.0
        if self.r_w is None:
            self.r_w = 3.0 * self.step
        ints = {"N_max": self.N_max, "N_conv": self.N_conv, "M": self.M}
        for name, v in ints.items():
            if int(v) != v or v <= 0:
                raise ValueError(f"{name} must be a positive integer")
        pos = {"tol": self.tol, "step": self.step, "r_w": self.r_w,
               "goal_radius": self.goal_radius, "altitude": self.altitude,
               "cruise_speed": self.cruise_speed}
        for name, v in pos.items():
            if not v > 0.0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.goal_bias <= 0.2:
            raise ValueError("goal_bias must lie in [0, 0.2]")


@dataclass
class PlanNode:
    """Read-only view of one tree node."""

    index: int
    coords: np.ndarray
    parent: int
    cost: float


class PlanTree:
    """Rooted tree over 2D waypoints with cost-to-come bookkeeping.

    Nodes are stored in flat arrays and never physically deleted; a node
    is either alive, alive-but-orphaned (detached by obstacle growth,
    excluded from every query until reconnected) or dead.  ``c_best`` is
    always recomputed from the set of alive connected nodes within
    ``goal_radius`` of the goal, including the exact closing segment.
    """

    def __init__(self, start, goal, goal_radius):
        self.start = np.asarray(start, dtype=float).reshape(2)
        self.goal = np.asarray(goal, dtype=float).reshape(2)
        self.goal_radius = float(goal_radius)
        cap = 256
        self._xy = np.zeros((cap, 2))
        self._parent = np.full(cap, _UNUSED, dtype=int)
        self._cost = np.zeros(cap)
        self._alive = np.zeros(cap, dtype=bool)
        self._orphan = np.zeros(cap, dtype=bool)
        self._children: list[list[int]] = [[] for _ in range(cap)]
        self.size = 0
        self._x_soln: set[int] = set()
        self.root = self.insert(self.start, _ROOT, 0.0)

    # -- storage ----------------------------------------------------------

    def _ensure_capacity(self):
        cap = self._xy.shape[0]
        if self.size < cap:
            return
        self._xy = np.vstack([self._xy, np.zeros((cap, 2))])
        self._parent = np.concatenate([self._parent,
                                       np.full(cap, _UNUSED, dtype=int)])
        self._cost = np.concatenate([self._cost, np.zeros(cap)])
        self._alive = np.concatenate([self._alive, np.zeros(cap, dtype=bool)])
        self._orphan = np.concatenate([self._orphan,
                                       np.zeros(cap, dtype=bool)])
        self._children.extend([] for _ in range(cap))

    def insert(self, xy, parent, cost):
        self._ensure_capacity()
        i = self.size
        self.size += 1
        self._xy[i] = xy
        self._parent[i] = parent
        self._cost[i] = cost
        self._alive[i] = True
        self._orphan[i] = False
        if parent >= 0:
            self._children[parent].append(i)
        if np.linalg.norm(np.asarray(xy) - self.goal) <= self.goal_radius:
            self._x_soln.add(i)
        return i

    # -- queries ----------------------------------------------------------

    def _active_mask(self):
        m = self._alive[:self.size] & ~self._orphan[:self.size]
        return m

    def coords(self, i):
        return self._xy[i].copy()

    def cost(self, i):
        return float(self._cost[i])

    def parent(self, i):
        return int(self._parent[i])

    def num_alive(self):
        return int(np.count_nonzero(self._active_mask()))

    def nearest(self, q):
        mask = self._active_mask()
        if not mask.any():
            return None
        d2 = np.einsum("ij,ij->i", self._xy[:self.size] - q,
                       self._xy[:self.size] - q)
        d2[~mask] = np.inf
        return int(np.argmin(d2))

    def near(self, q, radius):
        mask = self._active_mask()
        d2 = np.einsum("ij,ij->i", self._xy[:self.size] - q,
                       self._xy[:self.size] - q)
        hit = mask & (d2 <= radius * radius)
        return np.flatnonzero(hit)

    def solution_nodes(self):
        return sorted(i for i in self._x_soln
                      if self._alive[i] and not self._orphan[i])

    def c_best(self):
        best = math.inf
        for i in self.solution_nodes():
            total = self._cost[i] + float(
                np.linalg.norm(self._xy[i] - self.goal))
            if total < best:
                best = float(total)
        return best

    def best_goal_node(self):
        best, best_i = math.inf, None
        for i in self.solution_nodes():
            total = self._cost[i] + float(
                np.linalg.norm(self._xy[i] - self.goal))
            if total < best:
                best, best_i = float(total), i
        return best_i

    def best_path(self):
        """Waypoints root -> goal of the cheapest solution, goal appended."""
        i = self.best_goal_node()
        if i is None:
            raise PlanningError("tree holds no path reaching the goal")
        chain = []
        while i >= 0:
            chain.append(self._xy[i])
            i = self._parent[i]
        pts = list(reversed(chain))
        if np.linalg.norm(pts[-1] - self.goal) > 1e-12:
            pts.append(self.goal.copy())
        out = [pts[0]]
        for p in pts[1:]:
            if np.linalg.norm(p - out[-1]) > 1e-9:
                out.append(p)
        return np.array(out)

    def node(self, i):
        return PlanNode(index=i, coords=self.coords(i),
                        parent=self.parent(i), cost=self.cost(i))

    def to_records(self):
        """Flat node dump (alive connected nodes only) for artifacts."""
        recs = []
        for i in range(self.size):
            if self._alive[i] and not self._orphan[i]:
                recs.append({
                    "index": i,
                    "x": float(self._xy[i, 0]),
                    "y": float(self._xy[i, 1]),
                    "parent": int(self._parent[i]),
                    "cost": float(self._cost[i]),
                })
        return recs

    # -- mutation ---------------------------------------------------------

    def reparent(self, i, new_parent, new_cost):
        """Move node i under new_parent, shifting its subtree's costs."""
        old_parent = self._parent[i]
        if old_parent >= 0:
            self._children[old_parent].remove(i)
        self._parent[i] = new_parent
        self._children[new_parent].append(i)
        delta = new_cost - self._cost[i]
        stack = [i]
        while stack:
            k = stack.pop()
            self._cost[k] += delta
            stack.extend(self._children[k])

    def kill(self, i):
        """Remove node i (caller handles its children beforehand)."""
        p = self._parent[i]
        if p >= 0 and self._alive[p]:
            try:
                self._children[p].remove(i)
            except ValueError:
                pass
        self._alive[i] = False
        self._orphan[i] = False
        self._parent[i] = _UNUSED
        self._children[i] = []
        self._x_soln.discard(i)

    def component(self, r):
        """All node indices in the subtree rooted at r."""
        out = []
        stack = [r]
        while stack:
            k = stack.pop()
            out.append(k)
            stack.extend(self._children[k])
        return out

    def detach_orphan(self, r):
        """Cut r from its parent and flag its whole subtree as orphaned."""
        p = self._parent[r]
        if p >= 0 and self._alive[p]:
            try:
                self._children[p].remove(r)
            except ValueError:
                pass
        self._parent[r] = _ORPHAN
        for k in self.component(r):
            self._orphan[k] = True

    def adopt_orphan(self, n_o, new_parent):
        """Reconnect an orphaned component through its node n_o.

        The path from n_o up to the component's detached root is
        reversed so n_o becomes the component root, then the whole
        component gets fresh costs and rejoins every query.
        """
        chain = [n_o]
        while self._parent[chain[-1]] != _ORPHAN:
            chain.append(int(self._parent[chain[-1]]))
        for a, b in zip(chain, chain[1:]):
            # b was the parent of a; flip the edge
            self._children[b].remove(a)
            self._parent[b] = a
            self._children[a].append(b)
        self._parent[n_o] = new_parent
        self._children[new_parent].append(n_o)
        self._cost[n_o] = self._cost[new_parent] + float(
            np.linalg.norm(self._xy[n_o] - self._xy[new_parent]))
        stack = [n_o]
        while stack:
            k = stack.pop()
            self._orphan[k] = False
            if np.linalg.norm(self._xy[k] - self.goal) <= self.goal_radius:
                self._x_soln.add(k)
            for ch in self._children[k]:
                self._cost[ch] = self._cost[k] + float(
                    np.linalg.norm(self._xy[ch] - self._xy[k]))
                stack.append(ch)

    def orphan_nodes(self):
        return np.flatnonzero(self._alive[:self.size]
                              & self._orphan[:self.size])

    def orphan_roots(self):
        return [i for i in self.orphan_nodes()
                if self._parent[i] == _ORPHAN]

    # -- diagnostics -------------------------------------------------------

    def check_consistency(self):
        """Raise AssertionError on any structural violation (test hook)."""
        assert self._alive[self.root] and not self._orphan[self.root]
        assert self._parent[self.root] == _ROOT
        for i in range(self.size):
            if not self._alive[i]:
                continue
            for ch in self._children[i]:
                assert self._alive[ch], f"dead child {ch} linked under {i}"
                assert self._parent[ch] == i
            if self._orphan[i]:
                continue
            p = self._parent[i]
            if i == self.root:
                assert self._cost[i] == 0.0
                continue
            assert p >= 0, f"connected node {i} lacks a parent"
            assert self._alive[p] and not self._orphan[p]
            edge = float(np.linalg.norm(self._xy[i] - self._xy[p]))
            assert abs(self._cost[i] - (self._cost[p] + edge)) <= 1e-9, (
                f"cost recursion violated at node {i}")
            # acyclicity: walk to the root with a step budget
            k, steps = i, 0
            while k != self.root:
                k = int(self._parent[k])
                steps += 1
                assert k >= 0 and steps <= self.size, f"cycle through {i}"
        for i in self._x_soln:
            if self._alive[i] and not self._orphan[i]:
                assert np.linalg.norm(self._xy[i] - self.goal) \
                    <= self.goal_radius + 1e-12


# --------------------------------------------------------------------------
# sampling and collision gates


def sample_ellipse(start, goal, c_best, bounds: Bounds, rng):
    """Uniform sample from the informed subset (or the bounds if unsolved).

    With a finite incumbent cost the sample is uniform over the ellipse
    whose foci are start and goal and whose major axis is c_best, drawn
    by scaling a unit-disk sample to the half-axes c_best/2 and
    sqrt(c_best^2 - c_min^2)/2, rotated onto the focal line; samples
    falling outside the bounds are rejected and redrawn.
    """
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    if not math.isfinite(c_best):
        return bounds.sample(rng)
    c_min = float(np.linalg.norm(goal - start))
    c_best = max(float(c_best), c_min)
    center = 0.5 * (start + goal)
    a = 0.5 * c_best
    b = 0.5 * math.sqrt(max(c_best * c_best - c_min * c_min, 0.0))
    if c_min > 0.0:
        ex = (goal - start) / c_min
    else:
        ex = np.array([1.0, 0.0])
    ey = np.array([-ex[1], ex[0]])
    for _ in range(10000):
        r = math.sqrt(rng.random())
        phi = 2.0 * math.pi * rng.random()
        q = center + (a * r * math.cos(phi)) * ex + (b * r * math.sin(phi)) * ey
        if bounds.contains(q):
            return q
    return np.clip(q, bounds.lo, bounds.hi)


def _cross_section_rows(obs, altitude):
    """(A2, rhs) of the buffered cross-section {q : A2 q <= rhs}."""
    A = obs.A
    rhs = obs.buffered_b() - A[:, 2] * altitude
    return A[:, :2], rhs


def _point_in_cross_section(obs, q, altitude, tol=1e-12):
    A2, rhs = _cross_section_rows(obs, altitude)
    return bool(np.all(A2 @ np.asarray(q, dtype=float) <= rhs + tol))


def _segment_hits_obstacle(obs, p, q, altitude):
    """Exact test: does segment pq meet the buffered cross-section?

    Every half-space constraint is affine along the segment, so the
    feasible parameter set is an interval obtained by clipping [0, 1];
    the segment intersects iff the interval is nonempty.  Grazing
    contact counts as a hit.
    """
    A2, rhs = _cross_section_rows(obs, altitude)
    alpha = A2 @ p - rhs
    beta = A2 @ (q - p)
    t0, t1 = 0.0, 1.0
    for al, be in zip(alpha, beta):
        if abs(be) < 1e-15:
            if al > 1e-12:
                return False
            continue
        crossing = -al / be
        if be > 0.0:
            t1 = min(t1, crossing)
        else:
            t0 = max(t0, crossing)
        if t0 > t1 + 1e-12:
            return False
    return t0 <= t1 + 1e-12


def no_collision_2d(p, q, obstacles, altitude):
    """True iff segment pq avoids every buffered obstacle cross-section."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return not any(_segment_hits_obstacle(o, p, q, altitude)
                   for o in obstacles)


# --------------------------------------------------------------------------
# tree growth


def add_node(tree: PlanTree, obstacles, cfg: PlannerConfig, rng):
    """One sampling/steer/choose-parent/rewire round.

    Returns the index of the inserted node, or None when the sample was
    rejected (out of steer reach of free space); a rejected sample
    leaves the tree untouched.  Before a first solution exists the goal
    itself is sampled with probability ``goal_bias``.
    """
    c_best = tree.c_best()
    if (not math.isfinite(c_best)) and cfg.goal_bias > 0.0 \
            and rng.random() < cfg.goal_bias:
        x_rand = tree.goal.copy()
    else:
        x_rand = sample_ellipse(tree.start, tree.goal, c_best,
                                cfg.bounds, rng)
    i_near = tree.nearest(x_rand)
    if i_near is None:
        return None
    x_near = tree.coords(i_near)
    gap = float(np.linalg.norm(x_rand - x_near))
    if gap < 1e-12:
        return None
    x_new = x_near + min(cfg.step, gap) / gap * (x_rand - x_near)
    if not no_collision_2d(x_near, x_new, obstacles, cfg.altitude):
        return None
    near_idx = tree.near(x_new, cfg.r_w)
    dists = {int(i): float(np.linalg.norm(tree.coords(int(i)) - x_new))
             for i in near_idx}
    if any(d < 1e-9 for d in dists.values()):
        return None
    # choose parent: cheapest collision-free connection among neighbors,
    # with the steering node as always-valid fallback
    candidates = sorted(
        (tree.cost(i) + d, i) for i, d in dists.items())
    parent = i_near
    new_cost = tree.cost(i_near) + float(np.linalg.norm(x_new - x_near))
    for total, i in candidates:
        if total >= new_cost:
            break
        if i == i_near or no_collision_2d(tree.coords(i), x_new,
                                          obstacles, cfg.altitude):
            parent, new_cost = i, total
            break
    j = tree.insert(x_new, parent, new_cost)
    # rewire neighbors through the new node when strictly cheaper
    for i in sorted(dists):
        if i == parent:
            continue
        through = new_cost + dists[i]
        if through < tree.cost(i) - 1e-12 and no_collision_2d(
                x_new, tree.coords(i), obstacles, cfg.altitude):
            tree.reparent(i, j, through)
    return j


def _require_free_endpoint(label, q, obstacles, cfg):
    if not cfg.bounds.contains(q):
        raise PlanningError(f"{label} {np.round(q, 3).tolist()} is outside "
                            "the sampling bounds")
    for obs in obstacles:
        if _point_in_cross_section(obs, q, cfg.altitude):
            raise PlanningError(
                f"{label} lies inside buffered obstacle {obs.id!r} "
                f"(buffer {obs.buffer:.3f} m)")


def informed_rrt_star(start, goal, obstacles, cfg: PlannerConfig, rng,
                      tree: PlanTree | None = None):
    """Grow (or continue) a tree until the best cost stalls or N_max.

    Convergence: after at least N_conv iterations, stop when
    |c_i - c_{i-N_conv}| / c_{i-N_conv} <= tol with both costs finite.
    The returned tree may still hold no solution; callers decide whether
    that is fatal.
    """
    start = np.asarray(start, dtype=float).reshape(2)
    goal = np.asarray(goal, dtype=float).reshape(2)
    _require_free_endpoint("start", start, obstacles, cfg)
    _require_free_endpoint("goal", goal, obstacles, cfg)
    if tree is None:
        tree = PlanTree(start, goal, cfg.goal_radius)
    history = []
    for _ in range(cfg.N_max):
        add_node(tree, obstacles, cfg, rng)
        c = tree.c_best()
        history.append(c)
        if len(history) > cfg.N_conv:
            prev = history[-1 - cfg.N_conv]
            if math.isfinite(c) and math.isfinite(prev) and prev > 0.0:
                if abs((c - prev) / prev) <= cfg.tol:
                    break
    return tree


# --------------------------------------------------------------------------
# tube evaluation along a candidate path


def path_to_trajectory(path_xy, altitude, cruise_speed, vehicle="quadrotor",
                       fd_step=0.01):
    """Desired-trajectory callable for a planar waypoint path.

    Quadrotor: constant-altitude, constant-speed 3D polyline (piecewise
    linear position, piecewise constant velocity, zero commanded
    acceleration).  Fixed-wing: planar polyline track at the given
    altitude with finite-difference track acceleration.
    """
    path = np.asarray(path_xy, dtype=float)
    if path.ndim != 2 or path.shape[0] < 2 or path.shape[1] != 2:
        raise PlanningError("path must contain at least two 2D waypoints")
    if vehicle == "quadrotor":
        pts = np.column_stack([path, np.full(len(path), float(altitude))])
        return PolylineProfile3D(pts, float(cruise_speed))
    if vehicle == "fixedwing":
        return FixedWingPolylineProfile(path, float(altitude),
                                        float(cruise_speed), float(fd_step))
    raise PlanningError(f"unknown vehicle {vehicle!r}")


@dataclass
class TubeEvaluator:
    """Covariance pipeline bound to one vehicle and one time step.

    ``tube_for_path`` runs nominal integration, finite-difference
    linearization, covariance propagation and tube extraction for a
    candidate planar path.  When no explicit initial state is given, one
    is synthesized at the first waypoint heading along the first leg at
    cruise speed (quadrotor: matched position/velocity; fixed-wing:
    steady-flight trim).
    """

    model: object
    dt: float
    beta: float
    P0: np.ndarray | None = None
    initial_state: np.ndarray | None = None
    fd_step: float | None = None
    c2: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie strictly inside (0, 1)")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        self.c2 = chi2_quantile(self.beta, dof=3)
        if self.P0 is not None:
            self.P0 = np.asarray(self.P0, dtype=float)

    def initial_buffer(self):
        """c * sqrt(largest position variance) of P0, or 0 when unset."""
        if self.P0 is None:
            return 0.0
        rows = list(self.model.position_rows)
        block = self.P0[np.ix_(rows, rows)]
        lam = max(float(np.linalg.eigvalsh(block)[-1]), 0.0)
        return math.sqrt(self.c2) * math.sqrt(lam)

    def _initial_state_for(self, path, altitude, cruise_speed):
        if self.initial_state is not None:
            return np.asarray(self.initial_state, dtype=float)
        leg = np.asarray(path[1], dtype=float) - np.asarray(path[0],
                                                            dtype=float)
        heading = math.atan2(leg[1], leg[0])
        if self.model.name == "quadrotor":
            x0 = np.zeros(self.model.n_states)
            x0[0:2] = path[0]
            x0[2] = altitude
            x0[3] = cruise_speed * math.cos(heading)
            x0[4] = cruise_speed * math.sin(heading)
            return x0
        return self.model.trim_state(path[0], altitude, cruise_speed,
                                     heading)

    def tube_for_path(self, path_xy, altitude, cruise_speed):
        """(tube, nominal trajectory, covariance history) for a path."""
        des = path_to_trajectory(path_xy, altitude, cruise_speed,
                                 vehicle=self.model.name,
                                 fd_step=self.fd_step or self.dt)
        if des.duration < 2.0 * self.dt:
            raise PlanningError("path is too short for the time grid")
        grid = TimeGrid(0.0, des.duration, self.dt)
        x0 = self._initial_state_for(np.asarray(path_xy, dtype=float),
                                     altitude, cruise_speed)
        nominal = integrate_nominal(self.model, x0, des, grid)
        lin = linearize(self.model, nominal, des)
        P0 = self.P0 if self.P0 is not None \
            else np.zeros((self.model.n_states,) * 2)
        cov = propagate_covariance(lin, P0)
        tube = build_tube(nominal, cov, self.beta,
                          position_rows=self.model.position_rows)
        return tube, nominal, cov


# --------------------------------------------------------------------------
# the dynamic outer loop


def comp_obs_dist(tree: PlanTree, obstacles, evaluator: TubeEvaluator,
                  cfg: PlannerConfig):
    """Signed buffer adjustment per obstacle from the current best path.

    Propagates the tube along the tree's best path, then for every
    obstacle returns d_j = min(buffer_touch_distance, current buffer):
    positive d_j shrinks the buffer by the tube's spare clearance
    (capped so buffers stay nonnegative), negative d_j grows it by the
    violation depth.  Also returns the evaluated tube.
    """
    path = tree.best_path()
    tube, _, _ = evaluator.tube_for_path(path, cfg.altitude,
                                         cfg.cruise_speed)
    adjustments = {}
    for obs in obstacles:
        d_touch = buffer_touch_distance(tube, obs, tube.c2)
        adjustments[obs.id] = min(d_touch, obs.buffer)
    return adjustments, tube


def cleanup_and_regrow(tree: PlanTree, grown_obstacle, obstacles,
                       cfg: PlannerConfig, rng):
    """Repair the tree after ``grown_obstacle``'s buffer increased.

    Nodes inside the newly buffered region die; surviving subtrees
    hanging under them, and surviving nodes whose parent edge now
    crosses the region, are detached as orphan components.  Fresh
    add_node growth then tries to reconnect each component through any
    of its nodes within r_w of a new sample (re-rooting the component
    there); components still orphaned after N_max/4 iterations are
    pruned.
    """
    alt = cfg.altitude
    alive = [int(i) for i in np.flatnonzero(tree._alive[:tree.size])]
    dead = {i for i in alive
            if _point_in_cross_section(grown_obstacle, tree._xy[i], alt)}
    if tree.root in dead:
        raise PlanningError(
            f"start became infeasible: buffered obstacle "
            f"{grown_obstacle.id!r} covers it")
    roots = set()
    for i in dead:
        for ch in tree._children[i]:
            if ch not in dead:
                roots.add(ch)
    for i in alive:
        if i in dead or i == tree.root:
            continue
        p = tree.parent(i)
        if p < 0 or p in dead:
            continue
        if _segment_hits_obstacle(grown_obstacle, tree._xy[p], tree._xy[i],
                                  alt):
            roots.add(i)
    for i in sorted(dead):
        tree.kill(i)
    for r in sorted(roots):
        tree.detach_orphan(r)

    cap = max(cfg.N_max // 4, 1)
    for _ in range(cap):
        if len(tree.orphan_nodes()) == 0:
            break
        j = add_node(tree, obstacles, cfg, rng)
        if j is None:
            continue
        x_new = tree.coords(j)
        while True:
            orphans = tree.orphan_nodes()
            if orphans.size == 0:
                break
            d = np.linalg.norm(tree._xy[orphans] - x_new, axis=1)
            order = np.argsort(d, kind="stable")
            connected = False
            for k in order:
                if d[k] > cfg.r_w:
                    break
                cand = int(orphans[k])
                if no_collision_2d(x_new, tree._xy[cand], obstacles, alt):
                    tree.adopt_orphan(cand, j)
                    connected = True
                    break
            if not connected:
                break
    for r in tree.orphan_roots():
        for k in sorted(tree.component(r), reverse=True):
            tree.kill(k)
    return tree


@dataclass
class PlanResult:
    """Everything the dynamic planner produces for reporting."""

    path: np.ndarray | None
    tube: Tube | None
    reports: list
    buffer_history: list[dict]
    cost_history: list[float]
    outer_iterations: int
    solved: bool
    message: str = ""
    tree: PlanTree | None = None


def dynamic_informed_rrt_star(start, goal, obstacles, cfg: PlannerConfig,
                              evaluator: TubeEvaluator, rng):
    """M rounds of plan / propagate / resize buffers / repair tree.

    Buffers start at c * sqrt(lambda_max) of the initial position
    covariance (zero for a deterministic start).  Every non-final round
    applies b_j <- b_j - d_j from comp_obs_dist; any buffer that grew
    triggers tree surgery.  The final tube and per-obstacle clearances
    are evaluated against the true (unbuffered) obstacles.
    """
    start = np.asarray(start, dtype=float).reshape(2)
    goal = np.asarray(goal, dtype=float).reshape(2)
    init = evaluator.initial_buffer()
    for obs in obstacles:
        obs.buffer = init
    buffer_history = [{obs.id: obs.buffer for obs in obstacles}]
    cost_history = []
    tree = None
    for outer in range(cfg.M):
        tree = informed_rrt_star(start, goal, obstacles, cfg, rng, tree=tree)
        cost_history.append(tree.c_best())
        if not math.isfinite(tree.c_best()):
            return PlanResult(
                path=None, tube=None, reports=[],
                buffer_history=buffer_history, cost_history=cost_history,
                outer_iterations=outer + 1, solved=False,
                message="no path to the goal was found", tree=tree)
        if outer == cfg.M - 1:
            break
        adjustments, _ = comp_obs_dist(tree, obstacles, evaluator, cfg)
        grown = []
        for obs in obstacles:
            d_j = adjustments[obs.id]
            obs.buffer = obs.buffer - d_j
            if d_j < -1e-12:
                grown.append(obs)
        buffer_history.append({obs.id: obs.buffer for obs in obstacles})
        for obs in grown:
            cleanup_and_regrow(tree, obs, obstacles, cfg, rng)
    path = tree.best_path()
    tube, _, _ = evaluator.tube_for_path(path, cfg.altitude,
                                         cfg.cruise_speed)
    reports = check_tube_collision(tube, obstacles, stride=1)
    return PlanResult(
        path=path, tube=tube, reports=reports,
        buffer_history=buffer_history, cost_history=cost_history,
        outer_iterations=cfg.M, solved=True, tree=tree)
