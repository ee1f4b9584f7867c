"""Elastic-joint dynamics of the two-link variable-stiffness arm.

Model: each joint is a two-inertia-spring-damper system.  Link side

    M1(theta) theta'' + C(theta, theta') theta' + g(theta)
        + K (theta - phi) + C_s (theta' - phi') + b_l theta'
        = tau_ext + tau_limit

and motor side

    M2 phi'' + K (phi - theta) + C_s (phi' - theta') + b_m phi' = tau_m

with M2 = diag(J1, J2), K = diag(k1, k2) the current joint stiffness, C_s the
elastic-element damping, and tau_limit the unilateral spring-damper torque of
the mechanical joint limiter.  Joint friction is viscous only.  Gravity is
the in-plane component of the tilted operating plane (alpha = 0 means a
horizontal plane and zero gravity torque).

The transmission terms (K and C_s) are equal and opposite on the two sides,
so they cancel in the generalized momentum M1 theta' + M2 phi'; the momentum
observer is blind to them by construction.

All public functions are pure: state in, state out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .params import ArmParams


@dataclass(frozen=True)
class ArmState:
    """Full mechanical state of the arm at time t.

    k is the realized joint stiffness, k_target the commanded one; k chases
    k_target along the rate-limited ramp of the stiffness actuators.
    """

    theta: np.ndarray        # link angles, rad (2,)
    theta_dot: np.ndarray    # link velocities, rad/s
    phi: np.ndarray          # motor angles, rad
    phi_dot: np.ndarray      # motor velocities, rad/s
    k: np.ndarray            # current stiffness, N m / rad
    k_target: np.ndarray     # commanded stiffness, N m / rad
    t: float = 0.0

    def __post_init__(self):
        for name in ("theta", "theta_dot", "phi", "phi_dot", "k", "k_target"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (2,):
                raise ValueError(f"{name} must be a 2-vector")
            if not (math.isfinite(arr[0]) and math.isfinite(arr[1])):
                raise ValueError(f"{name} has non-finite entries")
            object.__setattr__(self, name, arr)

    def validate_stiffness(self, params: ArmParams) -> None:
        for name in ("k", "k_target"):
            arr = getattr(self, name)
            if np.any(arr < params.k_min - 1e-9) or np.any(arr > params.k_max + 1e-9):
                raise ValueError(f"{name} outside [{params.k_min}, {params.k_max}]: {arr}")

    def replace(self, **changes) -> "ArmState":
        return replace(self, **changes)

    @classmethod
    def _unchecked(cls, theta, theta_dot, phi, phi_dot, k, k_target, t) -> "ArmState":
        """Hot-path constructor for values the integrator just produced."""
        self = object.__new__(cls)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "theta_dot", theta_dot)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "phi_dot", phi_dot)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "k_target", k_target)
        object.__setattr__(self, "t", t)
        return self


def rest_state(params: ArmParams, theta, k=None, k_target=None, t: float = 0.0) -> ArmState:
    """Arm at rest with relaxed springs (phi = theta)."""
    theta = np.asarray(theta, dtype=float)
    k = np.full(2, params.k_min) if k is None else np.asarray(k, dtype=float)
    kt = k.copy() if k_target is None else np.asarray(k_target, dtype=float)
    zero = np.zeros(2)
    return ArmState(theta=theta, theta_dot=zero.copy(), phi=theta.copy(),
                    phi_dot=zero.copy(), k=k.copy(), k_target=kt, t=t)


class DynamicsResult(NamedTuple):
    theta_ddot: np.ndarray
    phi_ddot: np.ndarray
    saturated: np.ndarray    # bool (2,): commanded torque clipped at +-tau_max
    limit_hit: np.ndarray    # bool (2,): link at/through a joint limit


class StepResult(NamedTuple):
    state: ArmState
    saturated: np.ndarray
    limit_hit: np.ndarray


def mass_matrix(params: ArmParams, theta) -> np.ndarray:
    """Link-side inertia matrix M1(theta), kg m^2.

    Symmetric positive definite.  The off-diagonal sign reflects the mirrored
    joint senses (link-2 absolute angle is theta1 - theta2).
    """
    c2 = math.cos(float(theta[1]))
    a = params.I1 + params.I2 + params.m1 * params.lc1 ** 2 \
        + params.m2 * (params.l1 ** 2 + params.lc2 ** 2 + 2.0 * params.l1 * params.lc2 * c2)
    b = -(params.I2 + params.m2 * (params.lc2 ** 2 + params.l1 * params.lc2 * c2))
    d = params.I2 + params.m2 * params.lc2 ** 2
    return np.array([[a, b], [b, d]])


def coriolis_matrix(params: ArmParams, theta, theta_dot) -> np.ndarray:
    """Christoffel matrix C(theta, theta') with torque C theta'.

    Satisfies the passivity identity: dM1/dt - 2 C is skew-symmetric.
    """
    h = params.m2 * params.l1 * params.lc2 * math.sin(float(theta[1]))
    q1d = float(theta_dot[0])
    q2d = float(theta_dot[1])
    return np.array([[-h * q2d, h * (q2d - q1d)],
                     [h * q1d, 0.0]])


def gravity_torque(params: ArmParams, theta) -> np.ndarray:
    """In-plane gravity torque of the tilted operating plane, N m.

    The downhill direction within the plane is -y; the effective acceleration
    is g0 sin(alpha), so a horizontal plane (alpha = 0) contributes nothing.
    """
    g_ip = params.g0 * math.sin(params.alpha)
    if g_ip == 0.0:
        return np.zeros(2)
    q1 = float(theta[0])
    q12 = q1 - float(theta[1])
    s1, s12 = math.sin(q1), math.sin(q12)
    g1 = -g_ip * (params.m1 * params.lc1 * s1 + params.m2 * (params.l1 * s1 + params.lc2 * s12))
    g2 = g_ip * params.m2 * params.lc2 * s12
    return np.array([g1, g2])


def limit_torque(params: ArmParams, theta, theta_dot):
    """Unilateral spring-damper torque of the mechanical limiter (link side).

    Returns (tau_lim 2-vector, hit bool 2-vector).  The torque only ever
    pushes back into the range and never sticks (clamped toward zero).
    """
    tau = np.zeros(2)
    hit = np.zeros(2, dtype=bool)
    for i in range(2):
        q, qd = float(theta[i]), float(theta_dot[i])
        lo, hi = params.theta_min[i], params.theta_max[i]
        if q < lo:
            tau[i] = max(0.0, params.k_limit * (lo - q) - params.c_limit * qd)
            hit[i] = True
        elif q > hi:
            tau[i] = min(0.0, -params.k_limit * (q - hi) - params.c_limit * qd)
            hit[i] = True
    return tau, hit


def saturate_torque(params: ArmParams, tau_m):
    """Clip commanded motor torque to +-tau_max; reports which joints clipped."""
    tau = np.asarray(tau_m, dtype=float)
    clipped = np.clip(tau, -params.tau_max, params.tau_max)
    return clipped, np.abs(tau) > params.tau_max


def _accel_scalar(params: ArmParams, th1, th2, th1d, th2d, ph1, ph2,
                  ph1d, ph2d, k1, k2, tm1, tm2, te1, te2,
                  lock1=False, lock2=False):
    """Scalar core of the forward dynamics; returns accelerations and flags.

    Torque inputs must already be saturated.  A locked joint is held by a
    bench constraint: its accelerations are zero and the other joint solves
    its own reduced (single-row) equation.  Kept allocation-free for the
    1 kHz loop (a numpy round trip per RK4 stage is ~6x slower).
    """
    c2 = math.cos(th2)
    a = params.I1 + params.I2 + params.m1 * params.lc1 ** 2 \
        + params.m2 * (params.l1 ** 2 + params.lc2 ** 2 + 2.0 * params.l1 * params.lc2 * c2)
    b = -(params.I2 + params.m2 * (params.lc2 ** 2 + params.l1 * params.lc2 * c2))
    d = params.I2 + params.m2 * params.lc2 ** 2

    h = params.m2 * params.l1 * params.lc2 * math.sin(th2)
    cor1 = -h * th2d * th1d + h * (th2d - th1d) * th2d
    cor2 = h * th1d * th1d

    g_ip = params.g0 * math.sin(params.alpha)
    if g_ip != 0.0:
        q12 = th1 - th2
        s1, s12 = math.sin(th1), math.sin(q12)
        g1 = -g_ip * (params.m1 * params.lc1 * s1
                      + params.m2 * (params.l1 * s1 + params.lc2 * s12))
        g2 = g_ip * params.m2 * params.lc2 * s12
    else:
        g1 = g2 = 0.0

    # unilateral limiter (link side)
    lim1 = lim2 = 0.0
    hit1 = hit2 = False
    lo1, lo2 = params.theta_min
    hi1, hi2 = params.theta_max
    if th1 < lo1:
        lim1 = max(0.0, params.k_limit * (lo1 - th1) - params.c_limit * th1d)
        hit1 = True
    elif th1 > hi1:
        lim1 = min(0.0, -params.k_limit * (th1 - hi1) - params.c_limit * th1d)
        hit1 = True
    if th2 < lo2:
        lim2 = max(0.0, params.k_limit * (lo2 - th2) - params.c_limit * th2d)
        hit2 = True
    elif th2 > hi2:
        lim2 = min(0.0, -params.k_limit * (th2 - hi2) - params.c_limit * th2d)
        hit2 = True

    spr1 = k1 * (th1 - ph1) + params.c_s[0] * (th1d - ph1d)
    spr2 = k2 * (th2 - ph2) + params.c_s[1] * (th2d - ph2d)
    rhs1 = te1 + lim1 - cor1 - g1 - spr1 - params.b_l[0] * th1d
    rhs2 = te2 + lim2 - cor2 - g2 - spr2 - params.b_l[1] * th2d
    if lock1 or lock2:
        thdd1 = 0.0 if lock1 else rhs1 / a
        thdd2 = 0.0 if lock2 else rhs2 / d
    else:
        det = a * d - b * b
        thdd1 = (d * rhs1 - b * rhs2) / det
        thdd2 = (a * rhs2 - b * rhs1) / det
    fr1 = params.b_m[0] * ph1d
    fr2 = params.b_m[1] * ph2d
    cm1, cm2 = params.coulomb_m
    if cm1 != 0.0:
        fr1 += cm1 * math.tanh(ph1d / 0.01)   # smoothed sign, RK4-friendly
    if cm2 != 0.0:
        fr2 += cm2 * math.tanh(ph2d / 0.01)
    phdd1 = (tm1 + spr1 - fr1) / params.J1
    phdd2 = (tm2 + spr2 - fr2) / params.J2
    return thdd1, thdd2, phdd1, phdd2, hit1, hit2


def forward_dynamics(params: ArmParams, state: ArmState, tau_m, tau_ext,
                     locked=None) -> DynamicsResult:
    """Accelerations of links and motors under motor and external torque.

    tau_m is saturated internally to +-tau_max (flag reported).  ``locked``
    optionally clamps joints (bench configuration: both coordinates of a
    locked joint are held, accelerations forced to zero).
    """
    tau_m = np.asarray(tau_m, dtype=float)
    tau_ext = np.asarray(tau_ext, dtype=float)
    if not (np.all(np.isfinite(tau_m)) and np.all(np.isfinite(tau_ext))):
        raise ValueError("non-finite torque input")
    if not np.all(np.isfinite(state.theta)):
        raise ValueError("non-finite state")

    lock1 = lock2 = False
    if locked is not None:
        lock1, lock2 = bool(locked[0]), bool(locked[1])
    tau_applied, saturated = saturate_torque(params, tau_m)
    t1, t2, p1, p2, h1, h2 = _accel_scalar(
        params,
        float(state.theta[0]), float(state.theta[1]),
        float(state.theta_dot[0]), float(state.theta_dot[1]),
        float(state.phi[0]), float(state.phi[1]),
        float(state.phi_dot[0]), float(state.phi_dot[1]),
        float(state.k[0]), float(state.k[1]),
        float(tau_applied[0]), float(tau_applied[1]),
        float(tau_ext[0]), float(tau_ext[1]),
        lock1, lock2,
    )
    th_dd = np.array([t1, t2])
    ph_dd = np.array([p1, p2])
    if lock1:
        ph_dd[0] = 0.0
    if lock2:
        ph_dd[1] = 0.0
    return DynamicsResult(th_dd, ph_dd, saturated, np.array([h1, h2]))


def update_stiffness(state: ArmState, dt: float, params: ArmParams) -> ArmState:
    """Advance realized stiffness toward the command along the linear ramp.

    The slope is (k_max - k_min)/t_stiff, so a full-range command completes
    in exactly t_stiff.
    """
    max_step = params.stiffness_rate * dt
    delta = np.clip(state.k_target - state.k, -max_step, max_step)
    return ArmState._unchecked(state.theta, state.theta_dot, state.phi,
                               state.phi_dot, state.k + delta,
                               state.k_target, state.t)


def step(params: ArmParams, state: ArmState, tau_m, tau_ext, dt: float = 1e-3,
         locked=None, k_target=None) -> StepResult:
    """One classical RK4 step of the coupled link/motor dynamics.

    Stiffness is held constant within the step and ramped toward k_target
    afterwards (``k_target`` optionally re-commands it first).  Torque inputs
    are zero-order-held over the step.
    """
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    tm1, tm2 = float(tau_m[0]), float(tau_m[1])
    te1, te2 = float(tau_ext[0]), float(tau_ext[1])
    th1_0, th2_0 = float(state.theta[0]), float(state.theta[1])
    d1_0, d2_0 = float(state.theta_dot[0]), float(state.theta_dot[1])
    p1_0, p2_0 = float(state.phi[0]), float(state.phi[1])
    v1_0, v2_0 = float(state.phi_dot[0]), float(state.phi_dot[1])
    if not all(map(math.isfinite, (tm1, tm2, te1, te2, th1_0, th2_0,
                                   d1_0, d2_0, p1_0, p2_0, v1_0, v2_0))):
        raise ValueError("non-finite state or torque")

    sat1 = abs(tm1) > params.tau_max
    sat2 = abs(tm2) > params.tau_max
    tm1 = min(max(tm1, -params.tau_max), params.tau_max)
    tm2 = min(max(tm2, -params.tau_max), params.tau_max)
    k1_, k2_ = float(state.k[0]), float(state.k[1])
    lock1 = lock2 = False
    if locked is not None:
        lock1, lock2 = bool(locked[0]), bool(locked[1])

    hit_any1 = hit_any2 = False

    def deriv(y):
        nonlocal hit_any1, hit_any2
        th1, th2, d1, d2, p1, p2, v1, v2 = y
        if lock1:
            d1 = v1 = 0.0
        if lock2:
            d2 = v2 = 0.0
        a1, a2, b1, b2, h1, h2 = _accel_scalar(
            params, th1, th2, d1, d2, p1, p2, v1, v2,
            k1_, k2_, tm1, tm2, te1, te2, lock1, lock2)
        hit_any1 |= h1
        hit_any2 |= h2
        if lock1:
            b1 = 0.0
        if lock2:
            b2 = 0.0
        return (d1, d2, a1, a2, v1, v2, b1, b2)

    y0 = (th1_0, th2_0, d1_0, d2_0, p1_0, p2_0, v1_0, v2_0)
    f1 = deriv(y0)
    f2 = deriv(tuple(y + 0.5 * dt * d for y, d in zip(y0, f1)))
    f3 = deriv(tuple(y + 0.5 * dt * d for y, d in zip(y0, f2)))
    f4 = deriv(tuple(y + dt * d for y, d in zip(y0, f3)))
    yn = tuple(y + dt / 6.0 * (a + 2.0 * b + 2.0 * c + d)
               for y, a, b, c, d in zip(y0, f1, f2, f3, f4))

    # rate-limited stiffness ramp toward the (possibly re-commanded) target
    kt = state.k_target if k_target is None else np.asarray(k_target, dtype=float)
    max_step = params.stiffness_rate * dt
    kt1, kt2 = float(kt[0]), float(kt[1])
    k1n = k1_ + min(max(kt1 - k1_, -max_step), max_step)
    k2n = k2_ + min(max(kt2 - k2_, -max_step), max_step)

    new = ArmState._unchecked(
        np.array(yn[0:2]), np.array(yn[2:4]), np.array(yn[4:6]),
        np.array(yn[6:8]), np.array((k1n, k2n)), np.array((kt1, kt2)),
        state.t + dt)
    return StepResult(new, np.array([sat1, sat2]), np.array([hit_any1, hit_any2]))


def total_energy(params: ArmParams, state: ArmState) -> float:
    """Kinetic (link + motor) + elastic + gravitational potential, J.

    Potential is measured along the in-plane downhill axis, zero at the base.
    Does not include the limiter's contact energy; the passivity tests keep
    motion inside the limits.
    """
    M = mass_matrix(params, state.theta)
    kin_link = 0.5 * float(state.theta_dot @ M @ state.theta_dot)
    kin_motor = 0.5 * float(params.motor_inertia @ (state.phi_dot ** 2))
    defl = state.theta - state.phi
    elastic = 0.5 * float(state.k @ (defl ** 2))
    g_ip = params.g0 * math.sin(params.alpha)
    q1 = float(state.theta[0])
    q12 = q1 - float(state.theta[1])
    height = params.m1 * params.lc1 * math.cos(q1) \
        + params.m2 * (params.l1 * math.cos(q1) + params.lc2 * math.cos(q12))
    return kin_link + kin_motor + elastic + g_ip * height
