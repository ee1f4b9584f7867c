"""Simulated soft-tissue stabbing scenario and post-collision reactions.

The blade approaches a compression-only Kelvin-Voigt layer along a straight
Cartesian line at constant speed.  The layer pushes back with k_c * depth +
c_c * depth-rate (never adhesive); the blade only *cuts* (accrues penetration
depth) while the contact force exceeds the yield force F_y, below that it
indents elastically and the wipe-off depth measure stays zero.

Three cases reproduce the reaction-strategy comparison:

  1  low stiffness,  zero-torque reaction on detection
  2  high stiffness, zero-torque reaction (rigid-actuator reference case)
  3  high stiffness, zero-torque plus rapid softening to k_min

Softening is rate-limited by the 450 ms full-range actuator ramp, which is
why case 3 stays close to case 2 for collision events much shorter than the
ramp.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import dynamics as dyn, observer as om, trajectory as tj
from .control import PidGains, PidState, TrackingSetup, motor_reference, pid_step
from .kinematics import PlanarPose, forward_kinematics, inverse_kinematics, jacobian
from .params import ArmParams


class ReactionStrategy(enum.Enum):
    ZERO_TORQUE = "zero_torque"
    ZERO_TORQUE_SOFTEN = "zero_torque_soften"


CASE_SETUP = {
    1: ("low", ReactionStrategy.ZERO_TORQUE),
    2: ("high", ReactionStrategy.ZERO_TORQUE),
    3: ("high", ReactionStrategy.ZERO_TORQUE_SOFTEN),
}


@dataclass(frozen=True)
class ContactMedium:
    surface_s: float = 0.040    # boundary along the approach line, m
    k_c: float = 5200.0         # contact stiffness, N/m
    c_c: float = 55.0           # contact damping, N s/m
    F_y: float = 31.0           # cutting yield force, N
    depth_limit: float = 0.060  # medium thickness, m

    def __post_init__(self):
        if min(self.k_c, self.c_c, self.F_y, self.depth_limit) <= 0:
            raise ValueError("medium parameters must be positive")


def contact_force(medium: ContactMedium, tip_s: float, tip_v: float) -> float:
    """Normal force (N, >= 0) for a blade tip at line coordinate tip_s (m)
    moving at tip_v (m/s).  Zero outside the medium; compression only."""
    depth = tip_s - medium.surface_s
    if depth <= 0.0:
        return 0.0
    return max(0.0, medium.k_c * depth + medium.c_c * tip_v)


@dataclass(frozen=True)
class StabResult:
    case_id: int
    velocity: float          # commanded approach speed, m/s
    F_p: float               # peak contact force, N
    d_p: float               # max cutting excursion past the surface, mm
    detected_at: Optional[float]   # s, None if never detected
    peak_force_at: Optional[float]


@dataclass(frozen=True)
class StabSetup:
    start: PlanarPose = PlanarPose(-23.62, 650.69)   # impact pose of the task
    direction: tuple[float, float] = (0.0, 1.0)      # approach line, unit
    approach_accel: float = 3.0                      # m/s^2 reference ramp
    overtravel: float = 0.25                         # reference past surface, m
    epsilon_r: tuple[float, float] = (9.8, 9.4)
    gains: PidGains = PidGains()
    observer: om.ObserverConfig = om.ObserverConfig()
    dt: float = 1e-3


def apply_reaction(strategy: ReactionStrategy, params: ArmParams,
                   state: dyn.ArmState):
    """Control override after a latched detection: motor torque is zero; the
    softening variant additionally commands minimum stiffness (the 450 ms
    ramp applies downstream)."""
    tau = np.zeros(2)
    if strategy is ReactionStrategy.ZERO_TORQUE_SOFTEN:
        state = state.replace(k_target=np.full(2, params.k_min))
    return tau, state


def run_stab_scenario(case_id: int, velocity: float, params: ArmParams,
                      medium: ContactMedium, setup: StabSetup = StabSetup(),
                      log_arrays: bool = False):
    """Drive the blade into the medium at the case's stiffness level, detect,
    react, and record peak force / cutting depth over the whole event."""
    if case_id not in CASE_SETUP:
        raise ValueError(f"unknown case {case_id}")
    if velocity <= 0:
        raise ValueError("velocity must be positive")
    level, strategy = CASE_SETUP[case_id]
    k_level = params.k_max if level == "high" else params.k_min

    l1_mm, l2_mm = params.l1 * 1000.0, params.l2 * 1000.0
    limits = list(zip(params.theta_min, params.theta_max))
    d = np.asarray(setup.direction, dtype=float)
    d = d / np.hypot(d[0], d[1])
    p0 = setup.start.as_array()

    # reference: Cartesian trapezoidal ramp to constant speed along the line
    line = tj.plan_trapezoid(0.0, medium.surface_s + setup.overtravel,
                             velocity, setup.approach_accel)
    t_end = line.t_total + 0.8
    dt = setup.dt
    n = int(round(t_end / dt)) + 1

    theta0 = inverse_kinematics(l1_mm, l2_mm, setup.start, limits=limits)
    state = dyn.rest_state(params, theta0, k=[k_level, k_level])
    obs = om.init_observer(params, state, epsilon_r=np.asarray(setup.epsilon_r))
    pid = PidState()
    k_cmd = np.full(2, k_level)

    def tip_kinematics(s: dyn.ArmState):
        ee = forward_kinematics(l1_mm, l2_mm, s.theta)
        tip_s = float((np.array([ee.x, ee.y]) - p0) @ d) / 1000.0
        J = jacobian(l1_mm, l2_mm, s.theta) / 1000.0   # m/rad
        tip_v = float((J @ s.theta_dot) @ d)
        return tip_s, tip_v, J

    def external_torque(s: dyn.ArmState):
        tip_s, tip_v, J = tip_kinematics(s)
        f = contact_force(medium, tip_s, tip_v)
        return J.T @ (-f * d), f, tip_s

    F_p = 0.0
    d_p = 0.0
    peak_at = None
    reaction_active = False
    trace = {"t": [], "force": [], "tip_s": [], "r1": [], "r2": [],
             "tau1": [], "tau2": [], "k1": [], "k2": []} if log_arrays else None

    for i in range(n):
        t = i * dt
        s_ref, v_ref, _ = tj.sample(line, t)
        ref_pose = PlanarPose(float(p0[0] + d[0] * s_ref * 1000.0),
                              float(p0[1] + d[1] * s_ref * 1000.0))
        q_ref = inverse_kinematics(l1_mm, l2_mm, ref_pose, limits=limits)
        Jr = jacobian(l1_mm, l2_mm, q_ref) / 1000.0
        qdot_ref = np.linalg.solve(Jr, v_ref * d)

        if reaction_active:
            tau, state = apply_reaction(strategy, params, state)
        else:
            phi_ref = motor_reference(params, q_ref, k_cmd)
            tau, pid = pid_step(setup.gains, pid, phi_ref, qdot_ref,
                                state.phi, state.phi_dot, dt, params.tau_max)

        tau_ext, f_now, tip_s = external_torque(state)
        obs = om.observer_step(setup.observer, obs, params, state, tau)
        if obs.event is not None and not reaction_active:
            reaction_active = True
            tau, state = apply_reaction(strategy, params, state)

        if f_now > F_p:
            F_p, peak_at = f_now, t
        if f_now >= medium.F_y:
            depth = min(tip_s - medium.surface_s, medium.depth_limit)
            d_p = max(d_p, depth * 1000.0)

        if trace is not None:
            trace["t"].append(t)
            trace["force"].append(f_now)
            trace["tip_s"].append(tip_s)
            trace["r1"].append(float(obs.r[0]))
            trace["r2"].append(float(obs.r[1]))
            trace["tau1"].append(float(tau[0]))
            trace["tau2"].append(float(tau[1]))
            trace["k1"].append(float(state.k[0]))
            trace["k2"].append(float(state.k[1]))

        if i == n - 1:
            break
        state = _step_with_contact(params, state, tau, medium, d, p0,
                                   l1_mm, l2_mm, dt)

    result = StabResult(case_id=case_id, velocity=velocity, F_p=F_p, d_p=d_p,
                        detected_at=(obs.event.time if obs.event else None),
                        peak_force_at=peak_at)
    return (result, trace) if log_arrays else result


def _step_with_contact(params, state, tau_m, medium, d, p0, l1_mm, l2_mm, dt):
    """RK4 step with the contact force evaluated inside each stage (the
    contact layer is stiff enough that zero-order-holding it over the tick
    would pump artificial energy)."""
    tau_applied, _ = dyn.saturate_torque(params, tau_m)

    def deriv(th, thd, ph, phd):
        s = state.replace(theta=th, theta_dot=thd, phi=ph, phi_dot=phd)
        ee = forward_kinematics(l1_mm, l2_mm, th)
        tip_s = float((np.array([ee.x, ee.y]) - p0) @ d) / 1000.0
        J = jacobian(l1_mm, l2_mm, th) / 1000.0
        tip_v = float((J @ thd) @ d)
        f = contact_force(medium, tip_s, tip_v)
        res = dyn.forward_dynamics(params, s, tau_applied, J.T @ (-f * d))
        return thd, res.theta_ddot, phd, res.phi_ddot

    y0 = (state.theta, state.theta_dot, state.phi, state.phi_dot)
    k1 = deriv(*y0)
    k2 = deriv(*(y + 0.5 * dt * g for y, g in zip(y0, k1)))
    k3 = deriv(*(y + 0.5 * dt * g for y, g in zip(y0, k2)))
    k4 = deriv(*(y + dt * g for y, g in zip(y0, k3)))
    th, thd, ph, phd = (y + dt / 6.0 * (a + 2.0 * b + 2.0 * c + e)
                        for y, a, b, c, e in zip(y0, k1, k2, k3, k4))
    new = state.replace(theta=th, theta_dot=thd, phi=ph, phi_dot=phd,
                        t=state.t + dt)
    return dyn.update_stiffness(new, dt, params)


def sweep(velocities: Sequence[float], cases: Sequence[int], params: ArmParams,
          medium: ContactMedium, setup: StabSetup = StabSetup()) -> list[StabResult]:
    """Cross product of cases x velocities.  Verifies per-case monotonicity
    of depth and force in velocity before returning."""
    if not velocities or not cases:
        raise ValueError("velocities and cases must be non-empty")
    results = [run_stab_scenario(c, v, params, medium, setup)
               for c in cases for v in sorted(velocities)]
    for c in cases:
        rows = [r for r in results if r.case_id == c]
        for a, b in zip(rows, rows[1:]):
            if b.d_p < a.d_p - 1e-9 or b.F_p < a.F_p - 1e-6:
                raise AssertionError(
                    f"case {c}: depth/force not monotone between "
                    f"{a.velocity} and {b.velocity} m/s")
    return results
