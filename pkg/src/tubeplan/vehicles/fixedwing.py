"""Closed-loop fixed-wing model: 3D point mass, cascaded guidance, gusts.

State layout (14):

    x = [x, y, h, V, psi, gamma, T, V_des, psi_des,
         eta_u, eta_w (2), eta_v (2)]

Position (x, y) and altitude h are inertial; V is airspeed, psi heading,
gamma flight-path angle, T thrust (first-order lag toward the commanded
value).  V_des and psi_des are controller states integrated by the
lateral outer loop.  eta_* are the gust filter states in wind axes.

Equations of motion (mu is the bank angle commanded by the inner loop,
L/D are lift and drag, w_* the inertial gust components):

    x_dot   = V cos(gamma) cos(psi) + w_x
    y_dot   = V cos(gamma) sin(psi) + w_y
    h_dot   = V sin(gamma) + w_h
    V_dot   = (T - D)/m - g sin(gamma) - wdot_x cos(gamma) cos(psi)
              - wdot_y cos(gamma) sin(psi) + wdot_h sin(gamma)
    psi_dot = -[L sin(mu) - m wdot_x sin(psi) + m wdot_y cos(psi)]
              / (V m cos(gamma))
    gam_dot = [L cos(mu) - m g cos(gamma) + m wdot_x cos(psi) sin(gamma)
               + m wdot_y sin(gamma) sin(psi) + m wdot_h cos(gamma)]
              / (V m)

Gusts are generated in wind axes (u along-track, w vertical, v lateral)
and rotated into the inertial frame; their time derivatives carry the
white-noise feedthrough of the coloring filters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ModelDomainError
from .dryden import longitudinal_coeffs, transverse_coeffs

__all__ = [
    "FixedWingParams",
    "FixedWingModel",
    "inner_loop",
    "outer_longitudinal",
    "outer_lateral",
    "wind_to_inertial",
    "EPS_SING",
]

EPS_SING = 1e-6          # singularity guard on V, cos(gamma), V_des
_ASIN_CLAMP = 1.0 - 1e-9  # keeps the commanded flight-path angle off +/-90 deg


@dataclass
class FixedWingParams:
    """Airframe constants, controller gains and gust settings."""

    m: float = 5.0
    g: float = 9.81
    rho: float = 1.225
    S: float = 0.5
    C_D0: float = 0.02
    K_d: float = 0.05
    kappa_mu: float = 1.0
    kappa_CL: float = 2.0
    kappa_T1: float = 2.0
    kappa_T2: float = 1.0
    kappa: float = 0.5
    Lam_f: np.ndarray = field(default_factory=lambda: np.eye(2))
    sigma_u: float = 1.0
    sigma_w: float = 1.0
    sigma_v: float = 1.0
    L_u: float = 50.0
    L_w: float = 50.0
    L_v: float = 50.0

    def __post_init__(self):
        if min(self.m, self.g, self.rho, self.S) <= 0.0:
            raise ValueError("m, g, rho and S must be positive")
        if self.C_D0 < 0.0 or self.K_d < 0.0:
            raise ValueError("drag polar coefficients must be nonnegative")
        self.Lam_f = np.asarray(self.Lam_f, dtype=float)
        if self.Lam_f.shape != (2, 2):
            raise ValueError("Lam_f must be 2x2")
        # -Lam_f must be Hurwitz for the sliding surface to contract
        if np.any(np.real(np.linalg.eigvals(self.Lam_f)) <= 0.0):
            raise ValueError("Lam_f must have eigenvalues with positive real part")
        if min(self.sigma_u, self.sigma_w, self.sigma_v) < 0.0:
            raise ValueError("gust intensities must be nonnegative")
        if min(self.L_u, self.L_w, self.L_v) <= 0.0:
            raise ValueError("gust length scales must be positive")


def inner_loop(V, gamma, psi, psi_des, V_des, gamma_des, params):
    """Bank angle, lift coefficient and commanded thrust.

    Feedforward terms hold steady flight at the current (V, gamma);
    proportional corrections steer toward the outer-loop commands.
    """
    V = np.asarray(V, dtype=float)
    if not np.all(V > EPS_SING):
        raise ModelDomainError("inner loop needs airspeed > 0")
    p = params
    cg = np.cos(gamma)
    qS = p.S * V**2 * p.rho
    # in these axes a positive bank drives psi_dot negative (the lift
    # term enters psi_dot with a minus sign), so the heading error must
    # enter as (psi - psi_des) for the loop to be negative feedback
    mu = p.kappa_mu * (psi - psi_des)
    CL_bar = 2.0 * p.m * p.g * cg / qS
    C_L = CL_bar + p.kappa_CL * (gamma_des - gamma)
    T_bar = p.m * p.g * np.sin(gamma) + 0.5 * p.C_D0 * qS \
        + 2.0 * p.K_d * (p.m * p.g * cg) ** 2 / qS
    T_des = T_bar + p.kappa_T2 * (V_des - V)
    return mu, C_L, T_des


def outer_longitudinal(h, V, h_des, hdot_des, kappa):
    """Commanded flight-path angle from the altitude error dynamics.

    The arcsine argument is clamped to 1 - 1e-9 in magnitude so that an
    unreachable climb command saturates instead of leaving the domain.
    """
    V = np.asarray(V, dtype=float)
    if not np.all(V > EPS_SING):
        raise ModelDomainError("longitudinal outer loop needs airspeed > 0")
    arg = (hdot_des - kappa * (h - h_des)) / V
    return np.arcsin(np.clip(arg, -_ASIN_CLAMP, _ASIN_CLAMP))


def outer_lateral(x, y, V, psi, gamma, V_des, psi_des,
                  eta_des, etadot_des, etaddot_des, params):
    """Rates of the desired-speed and desired-heading states.

    Solves A [Vdot_des, psidot_des]^T = etaddot_des - kappa edot - Lam_f S
    where e is the lateral track error and S = edot + kappa e.  A becomes
    singular at |cos(gamma)| = 0 or V_des = 0, which is rejected.
    """
    p = params
    cg = np.cos(gamma)
    V_des = np.asarray(V_des, dtype=float)
    if not np.all(np.abs(cg) > EPS_SING):
        raise ModelDomainError("lateral outer loop singular near vertical flight")
    if not np.all(V_des > EPS_SING):
        raise ModelDomainError("lateral outer loop needs desired speed > 0")

    e = np.stack([x - eta_des[..., 0], y - eta_des[..., 1]], axis=-1)
    edot = np.stack([
        V * cg * np.cos(psi) - etadot_des[..., 0],
        V * cg * np.sin(psi) - etadot_des[..., 1],
    ], axis=-1)
    s = edot + p.kappa * e
    rhs = etaddot_des - p.kappa * edot - s @ p.Lam_f.T

    a11 = cg * np.cos(psi_des)
    a12 = -V_des * cg * np.sin(psi_des)
    a21 = cg * np.sin(psi_des)
    a22 = V_des * cg * np.cos(psi_des)
    det = a11 * a22 - a12 * a21
    vdot_des = (a22 * rhs[..., 0] - a12 * rhs[..., 1]) / det
    psidot_des = (-a21 * rhs[..., 0] + a11 * rhs[..., 1]) / det
    return vdot_des, psidot_des


def wind_to_inertial(w_u, w_w, w_v, psi, gamma, mu):
    """Rotate a wind-axes vector (u, w, v components) to inertial axes.

    Equal to the composition Rz(psi) @ Ry(gamma) @ Rx(-mu) applied to
    (w_u, w_w, w_v); norm preserving.
    """
    cpsi, spsi = np.cos(psi), np.sin(psi)
    cg, sg = np.cos(gamma), np.sin(gamma)
    cmu, smu = np.cos(mu), np.sin(mu)
    w_x = w_u * cg * cpsi - w_w * (cmu * spsi + cpsi * sg * smu) \
        - w_v * (smu * spsi - cmu * cpsi * sg)
    w_y = w_v * (cpsi * smu + cmu * sg * spsi) \
        + w_w * (cmu * cpsi - sg * smu * spsi) + w_u * cg * spsi
    w_h = w_v * cg * cmu - w_u * sg - w_w * cg * smu
    return w_x, w_y, w_h


class FixedWingModel:
    """Batched closed-loop dynamics; every method accepts (..., n) arrays."""

    name = "fixedwing"
    n_states = 14
    n_noise = 3
    position_rows = (0, 1, 2)
    state_labels = (
        "x", "y", "h", "V", "psi", "gamma", "T", "V_des", "psi_des",
        "eta_u", "eta_w1", "eta_w2", "eta_v1", "eta_v2",
    )

    def __init__(self, params: FixedWingParams | None = None):
        self.params = params if params is not None else FixedWingParams()

    def deriv(self, x, ref, noise):
        p = self.params
        x = np.asarray(x, dtype=float)
        noise = np.asarray(noise, dtype=float)

        V = x[..., 3]
        psi = x[..., 4]
        gamma = x[..., 5]
        T = x[..., 6]
        V_des = x[..., 7]
        psi_des = x[..., 8]
        eta_u = x[..., 9]
        eta_w = x[..., 10:12]
        eta_v = x[..., 12:14]

        if not np.all(V > EPS_SING):
            raise ModelDomainError("fixed-wing dynamics need airspeed > 0")
        cg = np.cos(gamma)
        sg = np.sin(gamma)
        if not np.all(np.abs(cg) > EPS_SING):
            raise ModelDomainError("fixed-wing dynamics singular near vertical flight")

        gamma_des = outer_longitudinal(x[..., 2], V, ref.h, ref.hdot, p.kappa)
        vdot_des, psidot_des = outer_lateral(
            x[..., 0], x[..., 1], V, psi, gamma, V_des, psi_des,
            ref.eta, ref.etadot, ref.etaddot, p)
        mu, C_L, T_cmd = inner_loop(V, gamma, psi, psi_des, V_des, gamma_des, p)

        # gust filters in wind axes, evaluated at the current airspeed
        a_u, c_u = longitudinal_coeffs(V, p.sigma_u, p.L_u)
        aw1, aw2, cw1, cw2 = transverse_coeffs(V, p.sigma_w, p.L_w)
        av1, av2, cv1, cv2 = transverse_coeffs(V, p.sigma_v, p.L_v)

        etadot_u = a_u * eta_u + noise[..., 0]
        etadot_w1 = aw1 * eta_w[..., 0] + aw2 * eta_w[..., 1] + noise[..., 1]
        etadot_v1 = av1 * eta_v[..., 0] + av2 * eta_v[..., 1] + noise[..., 2]

        w_u = c_u * eta_u
        w_w = cw1 * eta_w[..., 0] + cw2 * eta_w[..., 1]
        w_v = cv1 * eta_v[..., 0] + cv2 * eta_v[..., 1]
        # wdot = C (A eta + B n): the filters feed noise straight through
        wdot_u = c_u * etadot_u
        wdot_w = cw1 * etadot_w1 + cw2 * eta_w[..., 0]
        wdot_v = cv1 * etadot_v1 + cv2 * eta_v[..., 0]

        w_x, w_y, w_h = wind_to_inertial(w_u, w_w, w_v, psi, gamma, mu)
        wdot_x, wdot_y, wdot_h = wind_to_inertial(
            wdot_u, wdot_w, wdot_v, psi, gamma, mu)

        C_D = p.C_D0 + p.K_d * C_L**2
        q = 0.5 * p.rho * p.S * V**2
        lift = C_L * q
        drag = C_D * q
        cpsi, spsi = np.cos(psi), np.sin(psi)

        out = np.empty_like(x)
        out[..., 0] = V * cg * cpsi + w_x
        out[..., 1] = V * cg * spsi + w_y
        out[..., 2] = V * sg + w_h
        out[..., 3] = (T - drag) / p.m - p.g * sg \
            - wdot_x * cg * cpsi - wdot_y * cg * spsi + wdot_h * sg
        out[..., 4] = -(lift * np.sin(mu) - p.m * wdot_x * spsi
                        + p.m * wdot_y * cpsi) / (V * p.m * cg)
        out[..., 5] = (lift * np.cos(mu) - p.m * p.g * cg
                       + p.m * wdot_x * cpsi * sg
                       + p.m * wdot_y * sg * spsi
                       + p.m * wdot_h * cg) / (V * p.m)
        out[..., 6] = p.kappa_T1 * (T_cmd - T)
        out[..., 7] = vdot_des
        out[..., 8] = psidot_des
        out[..., 9] = etadot_u
        out[..., 10] = etadot_w1
        out[..., 11] = eta_w[..., 0]
        out[..., 12] = etadot_v1
        out[..., 13] = eta_v[..., 0]
        return out

    def trim_state(self, xy, altitude, speed, heading):
        """Steady-flight state matched to a straight, level reference."""
        p = self.params
        if speed <= EPS_SING:
            raise ModelDomainError("trim needs a positive airspeed")
        qS = p.S * speed**2 * p.rho
        T_bar = 0.5 * p.C_D0 * qS + 2.0 * p.K_d * (p.m * p.g) ** 2 / qS
        x0 = np.zeros(self.n_states)
        x0[0], x0[1] = xy
        x0[2] = altitude
        x0[3] = speed
        x0[4] = heading
        x0[5] = 0.0
        x0[6] = T_bar
        x0[7] = speed
        x0[8] = heading
        return x0
