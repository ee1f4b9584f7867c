"""Trapezoidal joint trajectories and the two-level stiffness schedule.

A profile has three phases: constant acceleration (parabolic position),
constant velocity (linear position), constant deceleration.  When the travel
is too short to reach v_max the profile degrades to a triangle with peak
velocity sqrt(a_max * distance).

The stiffness schedule commands the high level during the first half of the
acceleration phase and the second half of the deceleration phase, and the low
level in between; at rest (outside the profile) the joints stay stiff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .kinematics import jacobian


@dataclass(frozen=True)
class TrapezoidalProfile:
    q0: float          # rad
    qf: float
    v_peak: float      # rad/s, signed magnitude actually reached
    a_max: float       # rad/s^2 (magnitude)
    t_acc: float       # s
    t_coast: float
    t_dec: float

    @property
    def t_total(self) -> float:
        return self.t_acc + self.t_coast + self.t_dec

    @property
    def sign(self) -> float:
        return math.copysign(1.0, self.qf - self.q0) if self.qf != self.q0 else 0.0

    def time_scaled(self, factor: float) -> "TrapezoidalProfile":
        """Uniform time dilation by factor >= 1 (same path, slower)."""
        return replace(self, v_peak=self.v_peak / factor,
                       a_max=self.a_max / factor ** 2,
                       t_acc=self.t_acc * factor,
                       t_coast=self.t_coast * factor,
                       t_dec=self.t_dec * factor)


def plan_trapezoid(q0: float, qf: float, v_max: float, a_max: float,
                   limits=None) -> TrapezoidalProfile:
    """Plan a single-joint profile honoring velocity/acceleration caps."""
    if v_max <= 0 or a_max <= 0:
        raise ValueError("v_max and a_max must be positive")
    if limits is not None:
        lo, hi = limits
        for name, q in (("q0", q0), ("qf", qf)):
            if q < lo - 1e-9 or q > hi + 1e-9:
                raise ValueError(f"{name}={q:.4f} rad outside joint limits")
    d = abs(qf - q0)
    if d == 0.0:
        return TrapezoidalProfile(q0, qf, 0.0, a_max, 0.0, 0.0, 0.0)
    if d < v_max * v_max / a_max:
        # triangular
        t_acc = math.sqrt(d / a_max)
        return TrapezoidalProfile(q0, qf, a_max * t_acc, a_max, t_acc, 0.0, t_acc)
    t_acc = v_max / a_max
    t_coast = (d - v_max * v_max / a_max) / v_max
    return TrapezoidalProfile(q0, qf, v_max, a_max, t_acc, t_coast, t_acc)


def plan_timed(q0: float, qf: float, t_acc: float, t_total: float,
               t_dec: float | None = None) -> TrapezoidalProfile:
    """Plan with prescribed phase durations (synchronized multi-joint moves).

    Velocity and acceleration follow from the travel: v = d / (t_total - ...).
    """
    t_dec = t_acc if t_dec is None else t_dec
    if t_acc < 0 or t_dec < 0 or t_total < t_acc + t_dec:
        raise ValueError("inconsistent phase durations")
    d = abs(qf - q0)
    if d == 0.0 or t_total == 0.0:
        return TrapezoidalProfile(q0, qf, 0.0, 1.0, t_acc, t_total - t_acc - t_dec, t_dec)
    denom = t_total - 0.5 * (t_acc + t_dec)
    v = d / denom
    a = v / t_acc if t_acc > 0 else v / max(t_dec, 1e-9)
    return TrapezoidalProfile(q0, qf, v, a, t_acc, t_total - t_acc - t_dec, t_dec)


def sample(profile: TrapezoidalProfile, t: float):
    """(q_d, qdot_d, qddot_d) at time t, clamped to the profile ends."""
    s = profile.sign
    if s == 0.0:
        return profile.q0, 0.0, 0.0
    v = profile.v_peak
    a_acc = v / profile.t_acc if profile.t_acc > 0 else 0.0
    a_dec = v / profile.t_dec if profile.t_dec > 0 else 0.0
    if t <= 0.0:
        return profile.q0, 0.0, s * a_acc
    if t >= profile.t_total:
        return profile.qf, 0.0, 0.0
    if t < profile.t_acc:
        q = profile.q0 + s * 0.5 * a_acc * t * t
        return q, s * a_acc * t, s * a_acc
    d_acc = 0.5 * v * profile.t_acc
    if t < profile.t_acc + profile.t_coast:
        tau = t - profile.t_acc
        return profile.q0 + s * (d_acc + v * tau), s * v, 0.0
    tau = profile.t_total - t   # time remaining in deceleration
    q = profile.qf - s * 0.5 * a_dec * tau * tau
    return q, s * a_dec * tau, -s * a_dec


@dataclass(frozen=True)
class StiffnessSchedule:
    """Two-level stiffness plan tied to a synchronized profile."""

    k_high: float = 8000.0
    k_low: float = 70.0
    t_acc: float = 1.0
    t_dec: float = 1.0
    t_total: float = 6.0

    def __post_init__(self):
        if self.k_high < self.k_low:
            raise ValueError("k_high must be at least k_low")

    @property
    def high_windows(self):
        return ((0.0, 0.5 * self.t_acc),
                (self.t_total - 0.5 * self.t_dec, self.t_total))

    def stiffness_at(self, t: float) -> float:
        if t < 0.0 or t >= self.t_total:
            return self.k_high   # at rest the joints are held stiff
        (a0, a1), (b0, b1) = self.high_windows
        if a0 <= t < a1 or b0 <= t <= b1:
            return self.k_high
        return self.k_low


def schedule_for(profiles, k_high: float, k_low: float) -> StiffnessSchedule:
    """Schedule synchronized to the slowest of the per-joint profiles."""
    t_total = max(p.t_total for p in profiles)
    ref = max(profiles, key=lambda p: p.t_total)
    return StiffnessSchedule(k_high=k_high, k_low=k_low,
                             t_acc=ref.t_acc, t_dec=ref.t_dec, t_total=t_total)


def peak_ee_speed(profiles, l1_mm: float, l2_mm: float, dt: float = 1e-3) -> float:
    """Densely sampled end-effector speed maximum, m/s."""
    t_total = max(p.t_total for p in profiles)
    if t_total == 0.0:
        return 0.0
    ts = np.arange(0.0, t_total + dt, dt)
    peak = 0.0
    for t in ts:
        q = [sample(p, t) for p in profiles]
        theta = [q[0][0], q[1][0]]
        theta_dot = np.array([q[0][1], q[1][1]])
        v = jacobian(l1_mm, l2_mm, theta) @ theta_dot   # mm/s
        peak = max(peak, float(np.hypot(v[0], v[1])) / 1000.0)
    return peak


def cap_cartesian_speed(profiles, l1_mm: float, l2_mm: float, cap_mps: float,
                        dt: float = 1e-3):
    """Uniformly time-scale the synchronized profiles so the dense-sampled
    end-effector speed never exceeds the cap.  Path geometry is preserved.

    Rescaling is iterated because the dense samples of the slowed profile
    can expose a marginally higher true peak than the first pass saw.
    """
    if cap_mps <= 0:
        raise ValueError("cap must be positive")
    scaled = list(profiles)
    total = 1.0
    for _ in range(8):
        peak = peak_ee_speed(scaled, l1_mm, l2_mm, dt)
        if peak <= cap_mps:
            return scaled, total
        factor = peak / cap_mps
        scaled = [p.time_scaled(factor) for p in scaled]
        total *= factor
    raise RuntimeError("speed cap did not converge")
