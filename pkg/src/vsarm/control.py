"""PID joint control and the stiffness-scheduled tracking loop.

The controller acts on the motor coordinate by default (the link follows
through the joint spring); link-side feedback is selectable.  The desired
link trajectory maps to the motor reference through the static spring
deflection at the commanded stiffness, which for a horizontal operating
plane is the identity.

The tracking loop runs plant, observer and controller synchronously at the
simulation rate and records the full time series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import dynamics, observer as obs_mod, trajectory
from .dynamics import ArmState, rest_state
from .kinematics import PlanarPose, forward_kinematics, inverse_kinematics
from .observer import ObserverConfig, ObserverState
from .params import ArmParams
from .trajectory import StiffnessSchedule, TrapezoidalProfile


_ZERO2 = np.zeros(2)


@dataclass(frozen=True)
class PidGains:
    kp: tuple[float, float] = (220.0, 90.0)     # N m / rad
    ki: tuple[float, float] = (180.0, 75.0)     # N m / (rad s)
    kd: tuple[float, float] = (40.0, 16.0)      # N m s / rad
    integral_clamp: float = 12.0                # N m
    d_filter: float = 30.0                      # rad/s; 0 disables the filter
    feedback: str = "motor"                     # "motor" or "link"

    def __post_init__(self):
        if any(g < 0 for g in (*self.kp, *self.ki, *self.kd)):
            raise ValueError("PID gains must be non-negative")
        if self.integral_clamp <= 0:
            raise ValueError("integral clamp must be positive")
        if self.feedback not in ("motor", "link"):
            raise ValueError("feedback must be 'motor' or 'link'")


@dataclass
class PidState:
    integral: np.ndarray = field(default_factory=lambda: np.zeros(2))
    d_filt: np.ndarray = field(default_factory=lambda: np.zeros(2))
    primed: bool = False


def pid_step(gains: PidGains, ctrl: PidState, q_d, qdot_d, q, qdot,
             dt: float, tau_max: float = 35.0):
    """One PID update.  Returns (tau 2-vector clipped to +-tau_max, ctrl).

    The integral term is clamped (anti-windup); the derivative acts on the
    error rate through an optional first-order filter.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    e = np.asarray(q_d, dtype=float) - np.asarray(q, dtype=float)
    edot = np.asarray(qdot_d, dtype=float) - np.asarray(qdot, dtype=float)

    ki = np.asarray(gains.ki)
    integral = ctrl.integral + ki * e * dt
    integral = np.clip(integral, -gains.integral_clamp, gains.integral_clamp)

    if gains.d_filter > 0.0:
        a = gains.d_filter * dt
        alpha = a / (1.0 + a)
        d = ctrl.d_filt if ctrl.primed else edot
        d = d + alpha * (edot - d)
    else:
        d = edot
    ctrl.integral = integral
    ctrl.d_filt = d
    ctrl.primed = True

    tau = np.asarray(gains.kp) * e + integral + np.asarray(gains.kd) * d
    return np.clip(tau, -tau_max, tau_max), ctrl


@dataclass
class TrajectoryLog:
    """Uniformly sampled record of a tracking run plus summary errors."""

    dt: float
    t: np.ndarray
    q_d: np.ndarray          # desired link positions, rad (N, 2)
    q: np.ndarray            # link positions
    phi: np.ndarray          # motor positions
    k: np.ndarray            # realized stiffness
    tau: np.ndarray          # applied motor torque
    r: np.ndarray            # observer residual
    epsilon_r: np.ndarray    # detection threshold (2,)
    ee: np.ndarray           # end-effector position, mm (N, 2)
    saturated: np.ndarray    # bool (N, 2)
    limit_hit: np.ndarray    # bool (N, 2)
    detection: Optional[obs_mod.DetectionEvent] = None

    def rms_error_deg(self) -> np.ndarray:
        e = np.degrees(self.q_d - self.q)
        return np.sqrt(np.mean(e * e, axis=0))

    def max_abs_error_deg(self) -> np.ndarray:
        return np.max(np.abs(np.degrees(self.q_d - self.q)), axis=0)

    def final_cartesian_error_mm(self, target: PlanarPose) -> float:
        return float(np.hypot(self.ee[-1, 0] - target.x, self.ee[-1, 1] - target.y))

    def max_abs_residual(self) -> np.ndarray:
        return np.max(np.abs(self.r), axis=0)


@dataclass(frozen=True)
class TrackingSetup:
    """Everything the closed-loop run needs besides the plant parameters."""

    gains: PidGains = PidGains()
    observer: ObserverConfig = ObserverConfig()
    epsilon_r: tuple[float, float] = (9.0, 9.0)
    k_high: float = 8000.0
    k_low: float = 70.0
    t_acc: float = 1.0
    t_coast: float = 4.0
    t_dec: float = 1.0
    cart_speed_cap: float = 0.4      # m/s
    settle_time: float = 1.0         # hold after the profile ends, s
    dt: float = 1e-3


def motor_reference(params: ArmParams, q_d, k_cmd):
    """Static spring-deflection mapping from link reference to motor
    reference: phi_d = q_d + K^-1 g(q_d)."""
    g = dynamics.gravity_torque(params, q_d)
    return np.asarray(q_d, dtype=float) + g / np.asarray(k_cmd, dtype=float)


def run_profiles(params: ArmParams, profiles, schedule: StiffnessSchedule,
                 setup: TrackingSetup, start: ArmState,
                 plant_params: ArmParams | None = None,
                 duration: float | None = None) -> TrajectoryLog:
    """Track per-joint profiles with the scheduled stiffness.

    ``plant_params`` may differ from ``params`` (the controller/observer
    model) to inject model mismatch; by default they are the same object.
    """
    plant = plant_params or params
    dt = setup.dt
    t_end = duration if duration is not None else schedule.t_total + setup.settle_time
    n = int(round(t_end / dt)) + 1

    state = start
    pid = PidState()
    obs = obs_mod.init_observer(params, state, epsilon_r=np.asarray(setup.epsilon_r))

    cols = lambda: np.zeros((n, 2))
    log = TrajectoryLog(
        dt=dt, t=np.zeros(n), q_d=cols(), q=cols(), phi=cols(), k=cols(),
        tau=cols(), r=cols(), epsilon_r=np.asarray(setup.epsilon_r, dtype=float),
        ee=cols(), saturated=np.zeros((n, 2), dtype=bool),
        limit_hit=np.zeros((n, 2), dtype=bool),
    )

    l1_mm, l2_mm = plant.l1 * 1000.0, plant.l2 * 1000.0
    for i in range(n):
        t = i * dt
        qs = [trajectory.sample(p, t) for p in profiles]
        q_d = np.array([qs[0][0], qs[1][0]])
        qdot_d = np.array([qs[0][1], qs[1][1]])
        k_cmd = np.full(2, schedule.stiffness_at(t))

        if setup.gains.feedback == "motor":
            ref = motor_reference(params, q_d, k_cmd)
            tau, pid = pid_step(setup.gains, pid, ref, qdot_d,
                                state.phi, state.phi_dot, dt, params.tau_max)
        else:
            tau, pid = pid_step(setup.gains, pid, q_d, qdot_d,
                                state.theta, state.theta_dot, dt, params.tau_max)

        obs = obs_mod.observer_step(setup.observer, obs, params, state, tau)

        fk = forward_kinematics(l1_mm, l2_mm, state.theta)
        log.t[i] = t
        log.q_d[i] = q_d
        log.q[i] = state.theta
        log.phi[i] = state.phi
        log.k[i] = state.k
        log.tau[i] = tau
        log.r[i] = obs.r
        log.ee[i] = (fk.x, fk.y)

        if i == n - 1:
            break
        state, sat, lim = dynamics.step(plant, state, tau, _ZERO2, dt,
                                        k_target=k_cmd)
        log.saturated[i + 1] = sat
        log.limit_hit[i + 1] = lim

    log.detection = obs.event
    return log


def track(params: ArmParams, target: PlanarPose, setup: TrackingSetup,
          start_theta=None, plant_params: ArmParams | None = None) -> TrajectoryLog:
    """Point-to-point tracking run: IK, synchronized trapezoids, Cartesian
    speed cap, stiffness schedule, closed loop at the simulation rate."""
    l1_mm, l2_mm = params.l1 * 1000.0, params.l2 * 1000.0
    limits = list(zip(params.theta_min, params.theta_max))
    theta_f = inverse_kinematics(l1_mm, l2_mm, target, limits=limits)
    theta_0 = np.zeros(2) if start_theta is None else np.asarray(start_theta, dtype=float)

    profiles = [
        trajectory.plan_timed(theta_0[j], theta_f[j], setup.t_acc,
                              setup.t_acc + setup.t_coast + setup.t_dec, setup.t_dec)
        for j in range(2)
    ]
    for p in profiles:
        if p.v_peak > params.omega_max + 1e-9:
            raise ValueError("profile exceeds the joint speed limit")
    profiles, _ = trajectory.cap_cartesian_speed(profiles, l1_mm, l2_mm,
                                                 setup.cart_speed_cap, setup.dt)
    schedule = trajectory.schedule_for(profiles, setup.k_high, setup.k_low)

    start = rest_state(params, theta_0, k=np.full(2, schedule.stiffness_at(0.0)))
    return run_profiles(params, profiles, schedule, setup, start,
                        plant_params=plant_params)
