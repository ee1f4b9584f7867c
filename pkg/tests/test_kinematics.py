"""Planar kinematics: FK/IK round trips, Jacobian against finite
differences, the factory-geometry worked examples."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import finite_difference_jacobian
from vsarm.kinematics import (JointLimitError, PlanarPose, UnreachableError,
                              ee_speed, forward_kinematics, inverse_kinematics,
                              jacobian)

L1, L2 = 674.0, 545.0
LIMITS = [(0.0, math.radians(65.0)), (0.0, math.radians(125.0))]
angles = st.floats(min_value=-math.pi, max_value=math.pi)


def test_fully_extended_reach():
    p = forward_kinematics(L1, L2, [0.0, 0.0])
    assert (p.x, p.y) == pytest.approx((0.0, L1 + L2))


def test_right_angle_elbow_folds_toward_minus_x():
    p = forward_kinematics(L1, L2, [0.0, math.pi / 2])
    assert (p.x, p.y) == pytest.approx((-L2, L1))


@given(theta=st.tuples(angles, angles))
@settings(max_examples=200, deadline=None)
def test_reach_stays_in_annulus(theta):
    p = forward_kinematics(L1, L2, theta)
    r = math.hypot(p.x, p.y)
    assert abs(L1 - L2) - 1e-9 <= r <= L1 + L2 + 1e-9


@given(theta=st.tuples(angles, angles))
@settings(max_examples=100, deadline=None)
def test_jacobian_matches_finite_differences(theta):
    J = jacobian(L1, L2, theta)
    J_fd = finite_difference_jacobian(
        lambda q: forward_kinematics(L1, L2, q).as_array(), np.asarray(theta))
    assert J == pytest.approx(J_fd, rel=1e-6, abs=1e-5)


def test_jacobian_singular_at_straight_and_folded_elbow():
    assert abs(np.linalg.det(jacobian(L1, L2, [0.4, 0.0]))) < 1e-6
    assert abs(np.linalg.det(jacobian(L1, L2, [0.4, math.pi]))) < 1e-6


def test_ee_speed_matches_numeric_differentiation():
    theta = np.array([0.5, 1.2])
    theta_dot = np.array([0.3, -0.7])
    dt = 1e-6
    p0 = forward_kinematics(L1, L2, theta - dt * theta_dot / 2).as_array()
    p1 = forward_kinematics(L1, L2, theta + dt * theta_dot / 2).as_array()
    v_numeric = np.linalg.norm(p1 - p0) / dt
    assert ee_speed(L1, L2, theta, theta_dot) == pytest.approx(v_numeric, rel=1e-6)


def test_ik_at_annulus_boundary():
    for elbow in ("fold", "unfold"):
        theta = inverse_kinematics(L1, L2, PlanarPose(0.0, L1 + L2), elbow=elbow)
        assert theta == pytest.approx(np.zeros(2), abs=1e-9)


def test_ik_unreachable_raises():
    with pytest.raises(UnreachableError):
        inverse_kinematics(L1, L2, PlanarPose(0.0, 1300.0))


def test_ik_of_the_task_target_lands_inside_the_joint_limits():
    theta = inverse_kinematics(L1, L2, PlanarPose(-23.62, 650.69), limits=LIMITS)
    # frozen from the closed-form solution, verified by FK round trip below
    assert np.degrees(theta) == pytest.approx([46.454228, 116.460089], abs=1e-5)
    p = forward_kinematics(L1, L2, theta)
    assert p.distance_to(PlanarPose(-23.62, 650.69)) < 1e-9


def test_ik_out_of_limits_raises():
    # mirror of the task target: only reachable with the unfold branch,
    # which the factory limits exclude
    with pytest.raises(JointLimitError):
        inverse_kinematics(L1, L2, PlanarPose(23.62, 650.69), elbow="unfold",
                           limits=LIMITS)


@given(r=st.floats(min_value=200.0, max_value=L1 + L2 - 1.0),
       bearing=st.floats(min_value=-math.pi, max_value=math.pi),
       elbow=st.sampled_from(["fold", "unfold"]))
@settings(max_examples=200, deadline=None)
def test_ik_fk_round_trip(r, bearing, elbow):
    target = PlanarPose(r * math.sin(bearing), r * math.cos(bearing))
    theta = inverse_kinematics(L1, L2, target, elbow=elbow)
    assert forward_kinematics(L1, L2, theta).distance_to(target) < 1e-9
    # branch contract
    if elbow == "fold":
        assert theta[1] >= -1e-12
    else:
        assert theta[1] <= 1e-12
