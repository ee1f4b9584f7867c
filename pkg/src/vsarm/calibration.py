"""Collision-free calibration of the detection threshold.

The detection threshold must upper-bound the residual over the whole
collision-free operating envelope, under realistic model error.  The
calibration plant therefore differs from the observer model in two ways:

* all inertial parameters (masses, link and motor inertias) are perturbed
  by +-10 percent, and
* the drivetrain carries Coulomb friction that the viscous-only observer
  model does not represent (inertia error alone caps the residual near
  0.1 * tau_max because the observer can only misattribute torque the
  motors actually produce).

The maneuver set covers the task envelope: a fast point-to-point move at
each stiffness level plus an abrupt retargeting step at high stiffness (the
operator can retarget mid-motion, so the threshold must absorb it).
"""

from __future__ import annotations

import numpy as np

from . import dynamics as dyn, observer as om, trajectory as tj
from .control import PidGains, PidState, TrackingSetup, motor_reference, pid_step, run_profiles
from .params import ArmParams

INERTIA_MISMATCH = 0.10
CALIBRATION_COULOMB = (7.0, 7.5)    # N m, unmodeled drivetrain friction
AGITATION_STEP_DEG = 10.0


def _fast_move_residual(model: ArmParams, plant: ArmParams, gains: PidGains,
                        obs_cfg: om.ObserverConfig, k_level: float) -> np.ndarray:
    profiles = [
        tj.plan_trapezoid(np.radians(5.0), np.radians(60.0), 1.1, 2.2),
        tj.plan_trapezoid(np.radians(10.0), np.radians(120.0), 1.9, 2.4),
    ]
    t_total = max(p.t_total for p in profiles)
    sched = tj.StiffnessSchedule(k_high=k_level, k_low=k_level,
                                 t_acc=0.1, t_dec=0.1, t_total=t_total)
    setup = TrackingSetup(gains=gains, observer=obs_cfg,
                          epsilon_r=(np.inf, np.inf), settle_time=1.0)
    start = dyn.rest_state(plant, np.radians([5.0, 10.0]), k=[k_level, k_level])
    log = run_profiles(model, profiles, sched, setup, start, plant_params=plant)
    return log.max_abs_residual()


def _agitation_residual(model: ArmParams, plant: ArmParams, gains: PidGains,
                        obs_cfg: om.ObserverConfig, step_deg: float,
                        k_level: float = 8000.0, duration: float = 1.5) -> np.ndarray:
    th0 = np.radians([20.0, 60.0])
    ref = th0 + np.radians([step_deg, step_deg])
    state = dyn.rest_state(plant, th0, k=[k_level, k_level])
    obs = om.init_observer(model, state)
    pid = PidState()
    dt = obs_cfg.dt
    k_cmd = np.full(2, k_level)
    rmax = np.zeros(2)
    for _ in range(int(round(duration / dt))):
        phi_ref = motor_reference(model, ref, k_cmd)
        tau, pid = pid_step(gains, pid, phi_ref, np.zeros(2),
                            state.phi, state.phi_dot, dt, model.tau_max)
        obs = om.observer_step(obs_cfg, obs, model, state, tau)
        rmax = np.maximum(rmax, np.abs(obs.r))
        state, _, _ = dyn.step(plant, state, tau, np.zeros(2), dt)
    return rmax


def collision_free_residual_envelope(model: ArmParams, gains: PidGains,
                                     obs_cfg: om.ObserverConfig) -> list[np.ndarray]:
    """Per-run max |r| traces (as 1x2 arrays) over the maneuver set."""
    runs = []
    for scale in (1.0 - INERTIA_MISMATCH, 1.0 + INERTIA_MISMATCH):
        plant = model.scaled_inertia(scale).replace(coulomb_m=CALIBRATION_COULOMB)
        runs.append(_fast_move_residual(model, plant, gains, obs_cfg, model.k_min))
        runs.append(_fast_move_residual(model, plant, gains, obs_cfg, model.k_max))
        runs.append(_agitation_residual(model, plant, gains, obs_cfg, AGITATION_STEP_DEG))
    return [r.reshape(1, 2) for r in runs]


def calibrate(model: ArmParams, gains: PidGains,
              obs_cfg: om.ObserverConfig):
    """Run the maneuver set and return (r_hat_max, epsilon_r) per joint."""
    runs = collision_free_residual_envelope(model, gains, obs_cfg)
    return om.calibrate_threshold(obs_cfg, runs)
