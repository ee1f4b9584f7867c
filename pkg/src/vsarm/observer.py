"""Momentum-observer collision detection.

The observer integrates the generalized momentum p = M1(theta) theta' + M2 phi'
of the combined link/motor system.  Along the model, dp/dt equals

    tau_m + tau_ext - F_rl - F_rm - beta(theta, theta')

with beta = g(theta) - C(theta, theta')^T theta' (the joint springs cancel in
the sum), so the residual

    r = K_O [ p(t) - p(0) - integral(tau_m - F_rl - F_rm - beta + r) dt ]

obeys dr/dt = K_O (tau_ext - r): it is zero collision-free and converges to
an external torque as a first-order lag with time constant 1/K_O, without
needing accelerations or model inversion.

The running integral uses the trapezoidal rule at the fixed observer step for
the state-dependent terms (friction, beta, r), which are samples of continuous
signals.  The motor torque is applied zero-order-held by the 1 kHz loop, so
its integral is the exact staircase sum; trapezoiding it would systematically
leak dt/2 times the torque ramp into the residual.

A detection latches once any |r_i| crosses the calibrated threshold
eps_r = r_hat_max + eps_c and stays latched until reset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .dynamics import ArmState, coriolis_matrix, gravity_torque, mass_matrix
from .params import ArmParams


@dataclass(frozen=True)
class ObserverConfig:
    k_o: tuple[float, float] = (20.0, 20.0)   # diagonal gains, 1/s
    epsilon_c: float = 1.0                    # threshold margin, N m
    dt: float = 1e-3                          # observer step, s

    def __post_init__(self):
        if any(k <= 0 for k in self.k_o):
            raise ValueError("observer gains must be positive")
        if self.epsilon_c < 0:
            raise ValueError("epsilon_c must be non-negative")
        if self.dt <= 0:
            raise ValueError("observer dt must be positive")


@dataclass(frozen=True)
class DetectionEvent:
    time: float
    joint_index: int
    residual_value: float   # N m, signed


@dataclass(frozen=True)
class ObserverState:
    r: np.ndarray                      # residual, N m
    integral_acc: np.ndarray           # running integral, N m s
    p0: np.ndarray                     # initial momentum, N m s
    last_smooth: np.ndarray            # previous continuous-term sample
    last_tau: np.ndarray               # torque held over the elapsed tick
    epsilon_r: Optional[np.ndarray] = None      # detection threshold, N m
    r_hat_max: Optional[np.ndarray] = None      # calibrated max residual, N m
    event: Optional[DetectionEvent] = None      # latched detection
    primed: bool = False               # first sample seen

    def replace(self, **changes) -> "ObserverState":
        return replace(self, **changes)

    @property
    def detected(self) -> bool:
        return self.event is not None


def init_observer(params: ArmParams, state: ArmState,
                  epsilon_r=None, r_hat_max=None) -> ObserverState:
    """Observer state anchored at the current momentum."""
    p = momentum(params, state)
    z = np.zeros(2)
    eps = None if epsilon_r is None else np.asarray(epsilon_r, dtype=float)
    rmax = None if r_hat_max is None else np.asarray(r_hat_max, dtype=float)
    return ObserverState(r=z.copy(), integral_acc=z.copy(), p0=p,
                         last_smooth=z.copy(), last_tau=z.copy(),
                         epsilon_r=eps, r_hat_max=rmax)


def momentum(params: ArmParams, state: ArmState) -> np.ndarray:
    """Generalized momentum p = M1(theta) theta' + M2 phi', N m s."""
    return mass_matrix(params, state.theta) @ state.theta_dot \
        + params.motor_inertia * state.phi_dot


def beta(params: ArmParams, theta, theta_dot) -> np.ndarray:
    """g(theta) - C^T theta' from the model used by the observer."""
    theta_dot = np.asarray(theta_dot, dtype=float)
    C = coriolis_matrix(params, theta, theta_dot)
    return gravity_torque(params, theta) - C.T @ theta_dot


def observer_step(config: ObserverConfig, obs: ObserverState, params: ArmParams,
                  state: ArmState, tau_applied) -> ObserverState:
    """Advance the residual one fixed step from the measured state and the
    torque actually applied at the motors (post-saturation).

    This is the hot path of the 1 kHz loop, so the model terms are expanded
    to scalars here; momentum() and beta() above are the readable reference
    implementations and the test suite pins this expansion against them."""
    tau1, tau2 = float(tau_applied[0]), float(tau_applied[1])
    if not (math.isfinite(tau1) and math.isfinite(tau2)):
        raise ValueError("non-finite applied torque")

    # scalar expansion of momentum(), beta() and the friction model; the
    # matrix-form functions above stay the reference (cross-checked in tests)
    th2 = float(state.theta[1])
    d1, d2 = float(state.theta_dot[0]), float(state.theta_dot[1])
    v1, v2 = float(state.phi_dot[0]), float(state.phi_dot[1])
    c2 = math.cos(th2)
    a = params.I1 + params.I2 + params.m1 * params.lc1 ** 2 \
        + params.m2 * (params.l1 ** 2 + params.lc2 ** 2 + 2.0 * params.l1 * params.lc2 * c2)
    b = -(params.I2 + params.m2 * (params.lc2 ** 2 + params.l1 * params.lc2 * c2))
    dd = params.I2 + params.m2 * params.lc2 ** 2
    p1 = a * d1 + b * d2 + params.J1 * v1
    p2 = b * d1 + dd * d2 + params.J2 * v2

    h = params.m2 * params.l1 * params.lc2 * math.sin(th2)
    g_ip = params.g0 * math.sin(params.alpha)
    if g_ip != 0.0:
        q1 = float(state.theta[0])
        s1, s12 = math.sin(q1), math.sin(q1 - th2)
        g1 = -g_ip * (params.m1 * params.lc1 * s1
                      + params.m2 * (params.l1 * s1 + params.lc2 * s12))
        g2 = g_ip * params.m2 * params.lc2 * s12
    else:
        g1 = g2 = 0.0
    beta1 = g1                              # (C^T theta')_1 vanishes identically
    beta2 = g2 - h * d1 * (d2 - d1)

    sm1 = -(params.b_l[0] * d1 + params.b_m[0] * v1) - beta1 + float(obs.r[0])
    sm2 = -(params.b_l[1] * d2 + params.b_m[1] * v2) - beta2 + float(obs.r[1])

    if not obs.primed:
        i1, i2 = float(obs.integral_acc[0]), float(obs.integral_acc[1])
    else:
        # torque was held constant over the elapsed tick; the rest trapezoids
        dt = config.dt
        i1 = float(obs.integral_acc[0]) + dt * float(obs.last_tau[0]) \
            + 0.5 * dt * (float(obs.last_smooth[0]) + sm1)
        i2 = float(obs.integral_acc[1]) + dt * float(obs.last_tau[1]) \
            + 0.5 * dt * (float(obs.last_smooth[1]) + sm2)

    r = np.array([config.k_o[0] * (p1 - float(obs.p0[0]) - i1),
                  config.k_o[1] * (p2 - float(obs.p0[1]) - i2)])
    new = obs.replace(r=r, integral_acc=np.array([i1, i2]),
                      last_smooth=np.array([sm1, sm2]),
                      last_tau=np.array([tau1, tau2]), primed=True)
    if new.event is None and new.epsilon_r is not None:
        crossing = np.abs(r) >= new.epsilon_r
        if crossing.any():
            j = int(np.argmax(np.abs(r) - new.epsilon_r))
            new = new.replace(event=DetectionEvent(
                time=state.t, joint_index=j, residual_value=float(r[j])))
    return new


def detect(obs: ObserverState) -> Optional[DetectionEvent]:
    """Latched detection event, if any.  Requires a calibrated threshold."""
    if obs.epsilon_r is None:
        raise ValueError("observer threshold not calibrated")
    return obs.event


def reset_detection(obs: ObserverState) -> ObserverState:
    return obs.replace(event=None)


def calibrate_threshold(config: ObserverConfig,
                        collision_free_runs: Sequence[np.ndarray]):
    """Threshold from collision-free residual traces.

    Each trace is an (N, 2) array of residual samples.  Returns
    (r_hat_max, epsilon_r) with epsilon_r = r_hat_max + epsilon_c per joint.
    """
    if len(collision_free_runs) == 0:
        raise ValueError("at least one collision-free run is required")
    r_hat = np.zeros(2)
    for trace in collision_free_runs:
        arr = np.asarray(trace, dtype=float).reshape(-1, 2)
        if len(arr):
            r_hat = np.maximum(r_hat, np.max(np.abs(arr), axis=0))
    return r_hat, r_hat + config.epsilon_c
