"""Time grids, nominal integration, linearization and Monte Carlo.

The nominal (noise-free) trajectory is integrated with classic RK4.
Monte Carlo runs use Euler-Maruyama with piecewise-constant white noise
n_k ~ N(0, 1/dt), the step-limit approximation of unit-intensity
continuous white noise.  Randomness comes from numpy's Philox counter
generator (run i of an ensemble seeds Philox with base_seed + i), with
normal variates produced by numpy's ziggurat sampler; given the same
(model, x0, reference, grid, seed) every output bit is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ModelDomainError

__all__ = [
    "TimeGrid",
    "Trajectory",
    "LinearizationHistory",
    "integrate_nominal",
    "linearize",
    "mc_run",
    "mc_ensemble",
]

# ensemble runs are integrated in fixed-size blocks, accumulated in block
# order, so the reduction is deterministic regardless of where it executes
_CHUNK = 512


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid; count = round((tf - t0)/dt) + 1."""

    t0: float
    tf: float
    dt: float
    count: int = field(init=False)

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.tf <= self.t0:
            raise ValueError("tf must exceed t0")
        object.__setattr__(self, "count", int(round((self.tf - self.t0) / self.dt)) + 1)

    def times(self):
        return self.t0 + self.dt * np.arange(self.count)


@dataclass
class Trajectory:
    """States sampled on a grid, tagged with the model that produced them."""

    grid: TimeGrid
    states: np.ndarray
    model: str

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=float)
        if self.states.shape[0] != self.grid.count:
            raise ValueError("state history length does not match the grid")


@dataclass
class LinearizationHistory:
    """Jacobians of the closed-loop dynamics along a nominal trajectory."""

    grid: TimeGrid
    A: np.ndarray    # (count, n, n), d f / d x
    B_n: np.ndarray  # (count, n, m), d f / d noise


def _wrap_domain_error(err, t):
    return ModelDomainError(f"model domain error at t={t:.6g}: {err}")


def integrate_nominal(model, x0, des, grid):
    """Classic fixed-step RK4 of the closed-loop dynamics with zero noise."""
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (model.n_states,):
        raise ValueError(f"x0 must have shape ({model.n_states},)")
    zero_n = np.zeros(model.n_noise)
    dt = grid.dt
    out = np.empty((grid.count, model.n_states))
    out[0] = x0
    x = x0
    for k in range(grid.count - 1):
        t = grid.t0 + k * dt
        try:
            ref0 = des(t)
            refh = des(t + 0.5 * dt)
            ref1 = des(t + dt)
            k1 = model.deriv(x, ref0, zero_n)
            k2 = model.deriv(x + 0.5 * dt * k1, refh, zero_n)
            k3 = model.deriv(x + 0.5 * dt * k2, refh, zero_n)
            k4 = model.deriv(x + dt * k3, ref1, zero_n)
        except ModelDomainError as err:
            raise _wrap_domain_error(err, t) from err
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k + 1] = x
    return Trajectory(grid=grid, states=out, model=model.name)


def _stack_refs(samples):
    """Stack per-time reference samples into one broadcastable reference.

    Scalar fields become (count, 1) columns and vector fields
    (count, 1, d) blocks, so a model evaluated on a (count, rows, n)
    state batch broadcasts each grid point against its own reference.
    """
    import dataclasses

    cls = type(samples[0])
    kwargs = {}
    for f in dataclasses.fields(cls):
        arr = np.asarray([getattr(s, f.name) for s in samples], dtype=float)
        kwargs[f.name] = arr[:, None] if arr.ndim == 1 else arr[:, None, :]
    return cls(**kwargs)


# grid points linearized per batched model call: large enough that numpy
# dispatch overhead vanishes, small enough to keep temporaries in cache
_LIN_BLOCK = 256


def linearize(model, nominal, des):
    """Central finite-difference Jacobians A = df/dx and B_n = df/dn.

    Evaluated at every grid point of the nominal trajectory with zero
    noise; per-column step max(1e-6, 1e-6 |x_i|).  All 2(n + m)
    perturbed evaluations of a grid point run inside one batched model
    call, with grid points blocked together for speed.
    """
    n = model.n_states
    m = model.n_noise
    grid = nominal.grid
    A = np.empty((grid.count, n, n))
    B = np.empty((grid.count, n, m))
    rows = 2 * (n + m)
    times = grid.times()
    idx = np.arange(n)
    jdx = np.arange(m)
    for lo in range(0, grid.count, _LIN_BLOCK):
        hi = min(lo + _LIN_BLOCK, grid.count)
        states = nominal.states[lo:hi]
        block = hi - lo
        hx = np.maximum(1e-6, 1e-6 * np.abs(states))        # (block, n)
        X = np.repeat(states[:, None, :], rows, axis=1)
        X[:, 2 * idx, idx] += hx
        X[:, 2 * idx + 1, idx] -= hx
        N = np.zeros((block, rows, m))
        N[:, 2 * n + 2 * jdx, jdx] += 1e-6
        N[:, 2 * n + 2 * jdx + 1, jdx] -= 1e-6
        ref = _stack_refs([des(t) for t in times[lo:hi]])
        try:
            D = model.deriv(X, ref, N)
        except ModelDomainError:
            # redo pointwise so the error names the offending time
            for k in range(lo, hi):
                try:
                    model.deriv(X[k - lo], des(times[k]), N[k - lo])
                except ModelDomainError as err:
                    raise _wrap_domain_error(err, times[k]) from err
            raise
        dx = D[:, 0:2 * n:2] - D[:, 1:2 * n:2]               # (block, n, n)
        A[lo:hi] = np.transpose(dx / (2.0 * hx[:, :, None]), (0, 2, 1))
        dn = D[:, 2 * n::2] - D[:, 2 * n + 1::2]             # (block, m, n)
        B[lo:hi] = np.transpose(dn / (2.0 * 1e-6), (0, 2, 1))
    return LinearizationHistory(grid=grid, A=A, B_n=B)


def _noise_for_run(seed, steps, m, dt):
    rng = np.random.Generator(np.random.Philox(seed))
    return rng.standard_normal((steps, m)) / np.sqrt(dt)


def mc_run(model, x0, des, grid, seed):
    """One Euler-Maruyama sample path, fully determined by the seed."""
    x0 = np.asarray(x0, dtype=float)
    dt = grid.dt
    noise = _noise_for_run(seed, grid.count - 1, model.n_noise, dt)
    out = np.empty((grid.count, model.n_states))
    out[0] = x0
    x = x0
    for k in range(grid.count - 1):
        t = grid.t0 + k * dt
        try:
            x = x + dt * model.deriv(x, des(t), noise[k])
        except ModelDomainError as err:
            raise _wrap_domain_error(err, t) from err
        out[k + 1] = x
    return Trajectory(grid=grid, states=out, model=model.name)


def _euler_reference(model, x0, des, grid):
    """Zero-noise Euler path used to center the ensemble accumulators."""
    dt = grid.dt
    zero_n = np.zeros(model.n_noise)
    out = np.empty((grid.count, model.n_states))
    out[0] = x0
    x = np.asarray(x0, dtype=float)
    for k in range(grid.count - 1):
        x = x + dt * model.deriv(x, des(grid.t0 + k * dt), zero_n)
        out[k + 1] = x
    return out


def mc_ensemble(model, x0, des, grid, runs, base_seed, record_indices=None):
    """Seeded Monte Carlo ensemble: mean trajectory and sample covariance.

    Run i draws its noise exactly as ``mc_run(..., seed=base_seed + i)``
    would; runs are integrated vectorized in blocks of 512 and reduced in
    run order, so results are reproducible bit for bit.  The sample
    covariance is the unbiased estimator, accumulated about a
    deterministic reference path to keep the reduction well conditioned.

    When ``record_indices`` is given, per-run states at those grid
    indices are returned as an extra (runs, len(indices), n) array.
    """
    if runs < 2:
        raise ValueError("an ensemble needs at least two runs")
    x0 = np.asarray(x0, dtype=float)
    n = model.n_states
    m = model.n_noise
    dt = grid.dt
    count = grid.count
    refs = [des(grid.t0 + k * dt) for k in range(count - 1)]
    ref_path = _euler_reference(model, x0, des, grid)

    sum_d = np.zeros((count, n))
    sum_o = np.zeros((count, n, n))
    recorded = None
    if record_indices is not None:
        record_indices = [int(i) for i in record_indices]
        recorded = np.empty((runs, len(record_indices), n))
        record_pos = {k: j for j, k in enumerate(record_indices)}

    for lo in range(0, runs, _CHUNK):
        hi = min(lo + _CHUNK, runs)
        block = hi - lo
        noise = np.empty((block, count - 1, m))
        for r in range(block):
            noise[r] = _noise_for_run(base_seed + lo + r, count - 1, m, dt)
        X = np.tile(x0, (block, 1))
        for k in range(count):
            d = X - ref_path[k]
            sum_d[k] += d.sum(axis=0)
            sum_o[k] += d.T @ d
            if recorded is not None and k in record_pos:
                recorded[lo:hi, record_pos[k]] = X
            if k < count - 1:
                try:
                    X = X + dt * model.deriv(X, refs[k], noise[:, k])
                except ModelDomainError as err:
                    raise _wrap_domain_error(err, grid.t0 + k * dt) from err

    mean = ref_path + sum_d / runs
    cov = (sum_o - np.einsum("ki,kj->kij", sum_d, sum_d) / runs) / (runs - 1)
    cov = 0.5 * (cov + np.transpose(cov, (0, 2, 1)))

    from .uncertainty import CovarianceHistory  # deferred: avoids an import cycle

    mean_traj = Trajectory(grid=grid, states=mean, model=model.name)
    cov_hist = CovarianceHistory(grid=grid, P=cov)
    if recorded is not None:
        return mean_traj, cov_hist, recorded
    return mean_traj, cov_hist
