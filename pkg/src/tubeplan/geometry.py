"""Convex obstacles, ellipsoid collision checks and buffer sizing.

An obstacle is the bounded convex region ``{z : A z <= b}`` with rows of
``A`` normalized to unit Euclidean norm, so adding a scalar ``d`` to every
entry of ``b`` moves every face outward by the metric distance ``d``.

Whether a confidence ellipsoid ``(z - r)^T Sigma^-1 (z - r) <= c^2``
intersects the region is decided by the small quadratic program

    c*^2 = min_z (z - r)^T Sigma^-1 (z - r)   s.t.  A z <= b;

the ellipsoid misses the region exactly when ``c*^2 >= c^2``.  The QP is
solved with a primal active-set method after the substitution
``z = r + L u`` (``Sigma = L L^T``), which turns it into a minimum-norm
problem ``min ||u||^2 s.t. G u <= h``.  A cheap bounding-sphere test
prunes clearly separated pairs before any QP is solved.

``buffer_touch_distance`` inverts the test: it finds the uniform face
offset ``d'`` at which the tube's most critical cross-section exactly
attains ``c*^2 = c^2``, which is the quantity the planner subtracts from
an obstacle's buffer to drive the tube toward tangency.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ActiveSetError, BracketError, InfeasibleRegionError, ScenarioError
from .uncertainty import ConfidenceEllipsoid, Tube

__all__ = [
    "CuboidObstacle",
    "ClearanceReport",
    "solve_qp",
    "sphere_prefilter",
    "check_tube_collision",
    "buffer_touch_distance",
    "overall_verdict",
]

_FEAS_TOL = 1e-9


# --------------------------------------------------------------------------
# polytope helpers


def _enumerate_vertices(A, b, tol=_FEAS_TOL):
    """All basic feasible points of {z : A z <= b} (empty array if none)."""
    m = A.shape[0]
    found = []
    for rows in itertools.combinations(range(m), 3):
        sub = A[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        v = np.linalg.solve(sub, b[list(rows)])
        if np.all(A @ v <= b + tol):
            found.append(v)
    if not found:
        return np.empty((0, 3))
    pts = np.array(found)
    keep = []
    for p in pts:
        if all(np.linalg.norm(p - q) > 1e-9 for q in keep):
            keep.append(p)
    return np.array(keep)


def _unbounded_direction(A, tol=1e-10):
    """A unit recession direction of {z : A z <= b} if one exists, else None.

    Any nonzero direction can be scaled so its largest component is +-1,
    i.e. so it lies on a face of the unit cube.  Each cube face is swept
    by clipping the square of remaining coordinates against the
    half-planes induced by A d <= 0; any surviving point certifies an
    unbounded direction.
    """
    for axis in range(3):
        for sign in (1.0, -1.0):
            others = [i for i in range(3) if i != axis]
            # Clip [-1,1]^2 against a_i[others] . (u, v) <= -sign * a_i[axis]
            poly = [np.array([-1.0, -1.0]), np.array([1.0, -1.0]),
                    np.array([1.0, 1.0]), np.array([-1.0, 1.0])]
            for a in A:
                n2 = a[others]
                rhs = -sign * a[axis]
                nxt = []
                k = len(poly)
                for i in range(k):
                    p, q = poly[i], poly[(i + 1) % k]
                    fp = n2 @ p - rhs
                    fq = n2 @ q - rhs
                    if fp <= tol:
                        nxt.append(p)
                    if (fp <= tol) != (fq <= tol) and abs(fp - fq) > 1e-300:
                        t = fp / (fp - fq)
                        nxt.append(p + t * (q - p))
                poly = nxt
                if not poly:
                    break
            for p2 in poly:
                d = np.empty(3)
                d[axis] = sign
                d[others[0]], d[others[1]] = p2
                nd = np.linalg.norm(d)
                if nd > 1e-6 and np.all(A @ (d / nd) <= 1e-8):
                    return d / nd
    return None


@dataclass
class CuboidObstacle:
    """Bounded convex region {z : A z <= b} with a mutable face buffer.

    ``b`` always describes the true obstacle; ``buffer`` is the planner's
    current uniform inflation, applied as ``b + buffer`` where needed.
    Rows of ``A`` are unit-normalized at construction so the buffer is a
    metric distance.
    """

    A: np.ndarray
    b: np.ndarray
    buffer: float = 0.0
    id: str = "obstacle"
    vertices: np.ndarray = field(init=False, repr=False)
    centroid: np.ndarray = field(init=False, repr=False)
    circumradius: float = field(init=False, repr=False)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if A.ndim != 2 or A.shape[1] != 3 or A.shape[0] != b.shape[0]:
            raise ScenarioError(
                f"obstacle {self.id!r}: A must be (m, 3) with matching b")
        if A.shape[0] < 4:
            raise ScenarioError(
                f"obstacle {self.id!r}: at least 4 half-spaces are needed "
                "to bound a 3D region")
        norms = np.linalg.norm(A, axis=1)
        if np.any(norms < 1e-12):
            raise ScenarioError(f"obstacle {self.id!r}: zero row in A")
        self.A = A / norms[:, None]
        self.b = b / norms
        self.buffer = float(self.buffer)

        d = _unbounded_direction(self.A)
        if d is not None:
            raise ScenarioError(
                f"obstacle {self.id!r}: region is unbounded "
                f"(recession direction {np.round(d, 6).tolist()})")
        verts = _enumerate_vertices(self.A, self.b)
        if verts.shape[0] == 0:
            raise ScenarioError(f"obstacle {self.id!r}: region is empty")
        self.vertices = verts
        self.centroid = verts.mean(axis=0)
        self.circumradius = float(
            np.max(np.linalg.norm(verts - self.centroid, axis=1)))

    @classmethod
    def from_box(cls, center, half_extents, yaw=0.0, buffer=0.0,
                 id="obstacle"):
        """Axis-aligned box rotated by ``yaw`` about the vertical axis."""
        center = np.asarray(center, dtype=float).reshape(3)
        h = np.asarray(half_extents, dtype=float).reshape(3)
        if np.any(h <= 0.0):
            raise ScenarioError(f"obstacle {id!r}: half extents must be > 0")
        cy, sy = math.cos(yaw), math.sin(yaw)
        R = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
        rows = []
        rhs = []
        for i in range(3):
            axis = R[:, i]
            rows.extend([axis, -axis])
            rhs.extend([axis @ center + h[i], -(axis @ center) + h[i]])
        return cls(A=np.array(rows), b=np.array(rhs), buffer=buffer, id=id)

    def buffered_b(self, extra=0.0):
        """Right-hand side including the current buffer plus ``extra``."""
        return self.b + (self.buffer + extra)

    def contains(self, z, *, buffered=False, tol=_FEAS_TOL):
        rhs = self.buffered_b() if buffered else self.b
        return bool(np.all(self.A @ np.asarray(z, dtype=float) <= rhs + tol))


@dataclass
class ClearanceReport:
    """Worst-case clearance of one obstacle against a tube."""

    obstacle_id: str
    min_cstar2: float
    argmin_t: float | None
    z_star: np.ndarray | None
    c2: float
    verdict: str = field(init=False)

    def __post_init__(self):
        self.verdict = "collide" if self.min_cstar2 < self.c2 else "clear"


def overall_verdict(reports):
    """'collide' if any per-obstacle report collides, else 'clear'."""
    return "collide" if any(r.verdict == "collide" for r in reports) else "clear"


# --------------------------------------------------------------------------
# quadratic program


def _metric_factor(sigma):
    """Cholesky factor of sigma, regularized when (near-)singular."""
    sigma = np.asarray(sigma, dtype=float)
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        eps = max(1e-12 * float(np.trace(sigma)), 1e-30)
        return np.linalg.cholesky(sigma + eps * np.eye(3))


def _independent_active_rows(G, u, h, tol=1e-8):
    idx = [int(i) for i in np.flatnonzero(np.abs(G @ u - h) <= tol)]
    keep: list[int] = []
    for i in idx:
        trial = G[keep + [i]]
        if np.linalg.matrix_rank(trial, tol=1e-10) == len(keep) + 1:
            keep.append(i)
        if len(keep) == 3:
            break
    return keep


def _min_norm_active_set(G, h, u0, max_iter=200):
    """min ||u||^2 s.t. G u <= h from feasible u0, primal active set.

    Returns (u, working_set, multipliers).  Rows enter the working set
    only as blocking constraints, which keeps it linearly independent.
    """
    u = np.asarray(u0, dtype=float).copy()
    W = _independent_active_rows(G, u, h)
    for _ in range(max_iter):
        if W:
            GW = G[W]
            M = GW @ GW.T
            coef = np.linalg.solve(M, GW @ u)
            p = GW.T @ coef - u
        else:
            p = -u
        if np.linalg.norm(p) <= 1e-12 * (1.0 + np.linalg.norm(u)):
            if not W:
                return u, W, np.empty(0)
            lam = -2.0 * np.linalg.solve(M, GW @ u)
            worst = int(np.argmin(lam))
            if lam[worst] >= -1e-12:
                return u, W, lam
            W.pop(worst)
            continue
        alpha = 1.0
        blocker = -1
        for i in range(G.shape[0]):
            if i in W:
                continue
            gp = G[i] @ p
            if gp > 1e-14:
                ai = (h[i] - G[i] @ u) / gp
                if ai < alpha - 1e-15:
                    alpha = max(ai, 0.0)
                    blocker = i
        u = u + alpha * p
        if blocker >= 0:
            W.append(blocker)
    raise ActiveSetError("active-set iteration limit exceeded")


def _feasible_point(A, b):
    verts = _enumerate_vertices(A, b)
    if verts.shape[0] == 0:
        raise InfeasibleRegionError("constraint region is empty")
    return verts.mean(axis=0)


def _solve_qp_core(sigma, center, A, b, start_point=None):
    center = np.asarray(center, dtype=float).reshape(3)
    b = np.asarray(b, dtype=float).reshape(-1)
    if np.all(A @ center <= b + _FEAS_TOL):
        return center.copy(), 0.0
    L = _metric_factor(sigma)
    G = A @ L
    h = b - A @ center
    if start_point is not None and np.all(A @ start_point <= b + _FEAS_TOL):
        z0 = np.asarray(start_point, dtype=float)
    else:
        z0 = _feasible_point(A, b)
    u0 = np.linalg.solve(L, z0 - center)
    u, W, lam = _min_norm_active_set(G, h, u0)
    # KKT verification: stationarity, feasibility, sign of multipliers.
    scale = 1.0 + float(np.linalg.norm(u))
    primal = float(np.max(G @ u - h, initial=0.0))
    if W:
        stat = float(np.linalg.norm(2.0 * u + G[W].T @ lam))
    else:
        stat = float(np.linalg.norm(2.0 * u))
    if primal > 1e-9 * scale or stat > 1e-9 * scale or (
            lam.size and float(lam.min()) < -1e-9):
        raise ActiveSetError(
            f"KKT residual too large (primal {primal:.2e}, stationarity "
            f"{stat:.2e})")
    z = center + L @ u
    return z, float(u @ u)


def solve_qp(sigma, center, A_O, b_O):
    """Closest point of {A_O z <= b_O} to ``center`` in the Sigma metric.

    Returns ``(z_star, cstar2)`` where ``cstar2`` is the squared
    Mahalanobis distance; ``cstar2 = 0`` exactly when the center is
    feasible.  Raises InfeasibleRegionError for an empty region.
    """
    A_O = np.asarray(A_O, dtype=float)
    return _solve_qp_core(sigma, center, A_O, b_O)


def sphere_prefilter(ell: ConfidenceEllipsoid, obs: CuboidObstacle) -> bool:
    """Necessary condition for ellipsoid-obstacle intersection.

    Compares the ellipsoid's bounding sphere (radius c * sqrt(lambda_max))
    with the obstacle's circumscribed sphere inflated by any positive
    buffer.  Returns False only when intersection is impossible.
    """
    lam_max = max(float(np.linalg.eigvalsh(ell.sigma)[-1]), 0.0)
    reach = math.sqrt(ell.c2) * math.sqrt(lam_max)
    sep = float(np.linalg.norm(ell.center - obs.centroid))
    return sep <= reach + obs.circumradius + max(obs.buffer, 0.0) + _FEAS_TOL


def check_tube_collision(tube: Tube, obstacles, stride=1):
    """Minimum c*^2 of every obstacle over stride-sampled tube sections.

    The QP runs against the true obstacle (no buffer) whenever the sphere
    prefilter cannot rule intersection out; obstacles the prefilter
    always rejects report ``min_cstar2 = inf``.  Returns one
    ClearanceReport per obstacle, in input order.
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    reports = []
    for obs in obstacles:
        best = math.inf
        best_t = None
        best_z = None
        warm = None
        for k in range(0, len(tube), stride):
            ell = tube[k]
            if not sphere_prefilter(ell, obs):
                continue
            try:
                z, c2v = _solve_qp_core(ell.sigma, ell.center, obs.A, obs.b,
                                        start_point=warm)
            except (InfeasibleRegionError, ActiveSetError) as exc:
                raise type(exc)(
                    f"obstacle {obs.id!r} at t={ell.t:.6g}: {exc}") from exc
            warm = z
            if c2v < best:
                best, best_t, best_z = c2v, ell.t, z
        reports.append(ClearanceReport(
            obstacle_id=obs.id, min_cstar2=best, argmin_t=best_t,
            z_star=best_z, c2=tube.c2))
    return reports


def _most_critical_sample(tube: Tube, obs: CuboidObstacle):
    """Index of the tube sample with smallest c*^2 against the true obstacle.

    Samples are visited in order of an inexpensive lower bound
    (Euclidean separation squared over the largest eigenvalue), so most
    QPs are pruned once a good incumbent exists.
    """
    n = len(tube)
    lam_max = np.maximum(np.linalg.eigvalsh(tube.sigmas)[:, -1], 1e-30)
    sep = np.linalg.norm(tube.centers - obs.centroid, axis=1)
    gap = np.maximum(sep - obs.circumradius, 0.0)
    bound = gap * gap / lam_max
    order = np.argsort(bound)
    best = math.inf
    best_k = int(order[0])
    warm = None
    for k in order:
        if bound[k] >= best:
            break
        ell = tube[int(k)]
        z, c2v = _solve_qp_core(ell.sigma, ell.center, obs.A, obs.b,
                                start_point=warm)
        warm = z
        if c2v < best:
            best, best_k = c2v, int(k)
    return best_k, best


def buffer_touch_distance(tube: Tube, obs: CuboidObstacle, c2) -> float:
    """Uniform face offset d' at which the tube exactly touches level c^2.

    At the tube's most critical sample, d' solves c*^2(d') = c2 for the
    inflated region {A z <= b + d'}; positive d' means the tube clears
    the true obstacle with that much metric room to spare, negative d'
    means the obstacle would have to shrink by |d'| to escape the tube.
    Solved by bisection (c*^2 is non-increasing in d'), tolerance 1e-6
    on the objective.
    """
    if len(tube) == 0:
        raise ValueError("tube is empty")
    c2 = float(c2)
    k, f0 = _most_critical_sample(tube, obs)
    ell = tube[k]

    def objective(d):
        try:
            _, val = _solve_qp_core(ell.sigma, ell.center, obs.A, obs.b + d)
        except InfeasibleRegionError:
            return math.inf
        return val

    if abs(f0 - c2) <= 1e-6:
        return 0.0
    if f0 > c2:
        lo = 0.0
        hi = max(float(np.max(obs.A @ ell.center - obs.b)), 0.0) + 1.0
        for _ in range(60):
            if objective(hi) < c2:
                break
            hi *= 2.0
        else:
            raise BracketError(
                f"obstacle {obs.id!r}: no inflation reaches the tube")
    else:
        hi = 0.0
        lo = -1.0
        for _ in range(60):
            if objective(lo) > c2:
                break
            lo *= 2.0
        else:
            raise BracketError(
                f"obstacle {obs.id!r}: no shrinkage escapes the tube")
    # Invariant: objective(lo) > c2 >= objective(hi), objective non-increasing.
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = objective(mid)
        if abs(val - c2) <= 1e-6:
            return mid
        if val > c2:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14 * (1.0 + abs(hi)):
            return 0.5 * (lo + hi)
    raise BracketError(
        f"obstacle {obs.id!r}: buffer bisection failed to converge")
