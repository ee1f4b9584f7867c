"""Planar kinematics of the two-link arm.

Positions are in millimetres in the base frame (+y away from the user, +x to
the user's right).  Joint angles in radians: theta1 from +y toward +x,
theta2 the fold of link 2 back toward -x, so the absolute direction of
link 2 is theta1 - theta2.  With link lengths (674, 545):

    theta = (0, 0)       ->  (0, 1219)     fully extended
    theta = (0, 90 deg)  ->  (-545, 674)   right-angle elbow
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PlanarPose:
    """End-effector position in the base frame, mm."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("pose must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def distance_to(self, other: "PlanarPose") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


class UnreachableError(ValueError):
    """Target outside the reachable annulus."""


class JointLimitError(ValueError):
    """IK solution exists but violates the joint limits."""


def forward_kinematics(l1: float, l2: float, theta) -> PlanarPose:
    q1 = float(theta[0])
    q12 = q1 - float(theta[1])
    return PlanarPose(
        x=l1 * math.sin(q1) + l2 * math.sin(q12),
        y=l1 * math.cos(q1) + l2 * math.cos(q12),
    )


def elbow_point(l1: float, theta) -> PlanarPose:
    q1 = float(theta[0])
    return PlanarPose(x=l1 * math.sin(q1), y=l1 * math.cos(q1))


def jacobian(l1: float, l2: float, theta) -> np.ndarray:
    """d(x, y)/d(theta1, theta2), mm/rad."""
    q1 = float(theta[0])
    q12 = q1 - float(theta[1])
    c1, s1 = math.cos(q1), math.sin(q1)
    c12, s12 = math.cos(q12), math.sin(q12)
    return np.array([
        [l1 * c1 + l2 * c12, -l2 * c12],
        [-l1 * s1 - l2 * s12, l2 * s12],
    ])


def inverse_kinematics(l1: float, l2: float, p: PlanarPose, elbow: str = "fold",
                       limits=None) -> np.ndarray:
    """Closed-form IK.  elbow='fold' bends link 2 toward -x (theta2 >= 0,
    the only branch inside the factory limits); elbow='unfold' is the mirror
    branch with theta2 <= 0.

    Raises UnreachableError outside the annulus and JointLimitError when
    ``limits`` (pairs of (lo, hi) radians per joint) are given and violated.
    """
    r2 = p.x * p.x + p.y * p.y
    r = math.sqrt(r2)
    if r > l1 + l2 + 1e-9 or r < abs(l1 - l2) - 1e-9:
        raise UnreachableError(
            f"target at {r:.3f} mm outside annulus [{abs(l1 - l2):.3f}, {l1 + l2:.3f}]")

    cos_q2 = (r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)
    cos_q2 = min(1.0, max(-1.0, cos_q2))
    q2 = math.acos(cos_q2)
    if elbow == "unfold":
        q2 = -q2
    elif elbow != "fold":
        raise ValueError(f"elbow must be 'fold' or 'unfold', got {elbow!r}")

    # bearing of the target measured from +y toward +x
    bearing = math.atan2(p.x, p.y)
    # interior angle between link 1 and the base->target ray
    offset = math.atan2(l2 * math.sin(q2), l1 + l2 * math.cos(q2))
    q1 = bearing + offset
    theta = np.array([q1, q2])

    if limits is not None:
        for i, (lo, hi) in enumerate(limits):
            if theta[i] < lo - 1e-9 or theta[i] > hi + 1e-9:
                raise JointLimitError(
                    f"joint {i + 1} at {math.degrees(theta[i]):.2f} deg outside "
                    f"[{math.degrees(lo):.1f}, {math.degrees(hi):.1f}] deg")
    return theta


def ee_speed(l1: float, l2: float, theta, theta_dot) -> float:
    """End-effector speed magnitude for joint rates, in mm/s when lengths
    are mm (divide by 1000 for m/s)."""
    v = jacobian(l1, l2, theta) @ np.asarray(theta_dot, dtype=float)
    return float(np.hypot(v[0], v[1]))
