"""PID controller unit behavior and the closed tracking loop."""

import math

import numpy as np
import pytest

from vsarm.control import (PidGains, PidState, TrackingSetup, pid_step, track)
from vsarm.kinematics import PlanarPose, forward_kinematics


def test_zero_error_history_gives_zero_torque():
    gains = PidGains()
    tau, _ = pid_step(gains, PidState(), np.zeros(2), np.zeros(2),
                      np.zeros(2), np.zeros(2), 1e-3)
    assert tau == pytest.approx(np.zeros(2))


def test_constant_error_pure_proportional():
    gains = PidGains(kp=(10.0, 5.0), ki=(0.0, 0.0), kd=(0.0, 0.0))
    e = np.array([0.2, -0.1])
    ctrl = PidState()
    for _ in range(5):
        tau, ctrl = pid_step(gains, ctrl, e, np.zeros(2), np.zeros(2),
                             np.zeros(2), 1e-3)
    assert tau == pytest.approx(np.array([2.0, -0.5]))


def test_output_saturates_at_the_torque_limit():
    gains = PidGains(kp=(1000.0, 1000.0), ki=(0.0, 0.0), kd=(0.0, 0.0))
    tau, _ = pid_step(gains, PidState(), np.array([1.0, -1.0]), np.zeros(2),
                      np.zeros(2), np.zeros(2), 1e-3)
    assert tau == pytest.approx(np.array([35.0, -35.0]))


def test_integral_clamp_limits_windup():
    gains = PidGains(kp=(0.0, 0.0), ki=(100.0, 100.0), kd=(0.0, 0.0),
                     integral_clamp=2.0)
    ctrl = PidState()
    for _ in range(10000):
        tau, ctrl = pid_step(gains, ctrl, np.array([1.0, 1.0]), np.zeros(2),
                             np.zeros(2), np.zeros(2), 1e-3)
    assert np.all(np.abs(tau) <= 2.0 + 1e-9)


def test_closed_loop_step_matches_independent_discrete_simulation():
    """Single rigid inertia under the same discrete PID: the package loop
    must match a test-local simulation of the identical difference
    equations (semi-implicit Euler plant as the oracle integrator at a fine
    substep)."""
    J = 2.0
    b = 1.0
    dt = 1e-3
    gains = PidGains(kp=(30.0, 0.0), ki=(20.0, 0.0), kd=(8.0, 0.0),
                     integral_clamp=50.0, d_filter=0.0)
    ref = 0.3

    # package controller against a locally integrated plant
    ctrl = PidState()
    q = qd = 0.0
    pkg_trace = []
    for _ in range(2000):
        tau, ctrl = pid_step(gains, ctrl, np.array([ref, 0.0]), np.zeros(2),
                             np.array([q, 0.0]), np.array([qd, 0.0]), dt)
        qdd = (tau[0] - b * qd) / J
        qd += qdd * dt
        q += qd * dt
        pkg_trace.append(q)

    # independent reimplementation of the whole discrete loop
    integ = 0.0
    q2 = qd2 = 0.0
    ref_trace = []
    for _ in range(2000):
        e = ref - q2
        edot = -qd2
        integ = min(max(integ + 20.0 * e * dt, -50.0), 50.0)
        tau = min(max(30.0 * e + integ + 8.0 * edot, -35.0), 35.0)
        qdd = (tau - b * qd2) / J
        qd2 += qdd * dt
        q2 += qd2 * dt
        ref_trace.append(q2)

    assert pkg_trace == pytest.approx(ref_trace, abs=1e-12)


def test_track_to_current_pose_is_a_null_move(config):
    start = np.radians(config.task.home_pose_deg)
    l1, l2 = config.arm.l1 * 1000.0, config.arm.l2 * 1000.0
    here = forward_kinematics(l1, l2, start)
    setup = TrackingSetup(settle_time=0.2)
    log = track(config.arm, here, setup, start_theta=start)
    assert log.final_cartesian_error_mm(here) < 1e-6
    assert np.max(np.abs(log.q_d - start)) < 1e-12
    assert log.detection is None


def test_link_side_feedback_also_tracks(config):
    # link-side feedback through the soft spring needs far gentler gains
    # than the motor-side default; it trades accuracy for directness
    gains = PidGains(kp=(25.0, 12.0), ki=(12.0, 6.0), kd=(12.0, 6.0),
                     feedback="link")
    setup = TrackingSetup(gains=gains)
    log = track(config.arm, config.tracking_target, setup,
                start_theta=np.radians(config.task.home_pose_deg))
    assert log.final_cartesian_error_mm(config.tracking_target) < 10.0
    assert np.all(log.rms_error_deg() < 3.0)
    assert log.detection is None


def test_tracking_run_respects_the_speed_cap(config, tracking_log):
    from vsarm.kinematics import jacobian
    v = []
    for i in range(0, len(tracking_log.t), 5):
        J = jacobian(config.arm.l1 * 1000.0, config.arm.l2 * 1000.0,
                     tracking_log.q_d[i])
        rate = (tracking_log.q_d[min(i + 1, len(tracking_log.t) - 1)]
                - tracking_log.q_d[max(i - 1, 0)]) / (2 * tracking_log.dt)
        v.append(np.linalg.norm(J @ rate) / 1000.0)
    assert max(v) <= config.tracking.cart_speed_cap + 1e-6
