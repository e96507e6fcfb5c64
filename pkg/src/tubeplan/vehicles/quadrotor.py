"""Closed-loop quadrotor point-mass model with gust-dependent drag.

State layout (9):

    x = [r (3), V0 (3), eta (3)]

r is inertial position, V0 inertial velocity, and eta the three scalar
gust filter states (one longitudinal Dryden channel replicated per
inertial axis, each evaluated at the vehicle speed ||V0||).

The translational dynamics are a double integrator with aerodynamic
drag on the gust-relative velocity:

    r_dot  = V0
    V0_dot = u - (rho S C_D / (2 m)) * V_q ||V_q||,   V_q = V0 - w

where w_i = c_i eta_i is the gust velocity.  The tracking controller is
a sliding-surface design with acceleration feedforward:

    u = rddot_des - K edot - Lam (edot + K e),   e = r - r_des.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ModelDomainError
from .dryden import longitudinal_coeffs

__all__ = ["QuadrotorParams", "QuadrotorModel"]


def _as_gain(value, name):
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3, 3):
        raise ValueError(f"{name} must be a 3x3 matrix")
    eigs = np.linalg.eigvalsh(0.5 * (arr + arr.T))
    if np.any(eigs <= 0.0):
        raise ValueError(f"{name} must be positive definite")
    return arr


@dataclass
class QuadrotorParams:
    """Physical constants and gains; defaults give a ~1 kg vehicle."""

    m: float = 1.0
    rho: float = 1.225
    S: float = 0.05
    C_D: float = 1.0
    K: np.ndarray = field(default_factory=lambda: 2.0 * np.eye(3))
    Lam: np.ndarray = field(default_factory=lambda: 2.0 * np.eye(3))
    sigma: np.ndarray = field(default_factory=lambda: np.ones(3))
    L: np.ndarray = field(default_factory=lambda: 50.0 * np.ones(3))

    def __post_init__(self):
        if self.m <= 0.0 or self.rho <= 0.0 or self.S <= 0.0:
            raise ValueError("m, rho and S must be positive")
        if self.C_D < 0.0:
            raise ValueError("C_D must be nonnegative")
        self.K = _as_gain(self.K, "K")
        self.Lam = _as_gain(self.Lam, "Lam")
        self.sigma = np.asarray(self.sigma, dtype=float).reshape(3)
        self.L = np.asarray(self.L, dtype=float).reshape(3)
        if np.any(self.sigma < 0.0):
            raise ValueError("gust intensities must be nonnegative")
        if np.any(self.L <= 0.0):
            raise ValueError("gust length scales must be positive")


class QuadrotorModel:
    """Batched closed-loop dynamics; every method accepts (..., n) arrays."""

    name = "quadrotor"
    n_states = 9
    n_noise = 3
    position_rows = (0, 1, 2)
    state_labels = ("x", "y", "z", "vx", "vy", "vz", "eta_x", "eta_y", "eta_z")

    def __init__(self, params: QuadrotorParams | None = None):
        self.params = params if params is not None else QuadrotorParams()

    def controller(self, x, ref):
        """Commanded acceleration for the current state and reference."""
        x = np.asarray(x, dtype=float)
        e = x[..., 0:3] - ref.r
        edot = x[..., 3:6] - ref.rdot
        s = edot + e @ self.params.K.T
        return ref.rddot - edot @ self.params.K.T - s @ self.params.Lam.T

    def deriv(self, x, ref, noise):
        """Closed-loop state derivative; raises on zero vehicle speed."""
        p = self.params
        x = np.asarray(x, dtype=float)
        noise = np.asarray(noise, dtype=float)
        v = x[..., 3:6]
        eta = x[..., 6:9]

        speed = np.linalg.norm(v, axis=-1)
        if not np.all(speed > 0.0):
            raise ModelDomainError(
                "quadrotor gust filters are singular at zero vehicle speed")
        pole, gain = longitudinal_coeffs(speed[..., None], p.sigma, p.L)

        w = gain * eta
        vq = v - w
        drag = (0.5 * p.rho * p.S * p.C_D / p.m) \
            * vq * np.linalg.norm(vq, axis=-1, keepdims=True)

        out = np.empty_like(x)
        out[..., 0:3] = v
        out[..., 3:6] = self.controller(x, ref) - drag
        out[..., 6:9] = pole * eta + noise
        return out
