"""Physical parameters of the two-link variable-stiffness arm.

Conventions used across the package:

* Base frame: +y points away from the seated user ("forward"), +x to the
  user's right, angles in radians internally (config files use degrees).
* Joint 1 angle theta1 is measured from the +y axis; positive theta1 swings
  link 1 toward +x.  Joint 2 angle theta2 is the bend of link 2 relative to
  link 1; positive theta2 folds the end-effector back toward -x.  The
  absolute orientation of link 2 is therefore theta1 - theta2.  This mirrored
  pair of senses is what makes the factory joint ranges (0-65 deg, 0-125 deg)
  reach the task region in front of the base.
* Each joint is a two-inertia system: motor (phi, reflected inertia J) and
  link (theta) coupled by the commandable spring k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

DEG = math.pi / 180.0


@dataclass(frozen=True)
class ArmParams:
    """All physical constants of the arm, SI units.

    Per-joint quantities are (joint 1, joint 2) tuples.
    """

    # geometry
    l1: float = 0.674            # link lengths, m
    l2: float = 0.545
    lc1: float = 0.26            # COM distance from joint axis, m
    lc2: float = 0.22
    # link-side inertial parameters
    m1: float = 2.0              # kg, link 1 incl. belt pulley share
    m2: float = 0.45             # kg, link 2 incl. knife module
    I1: float = 0.09             # kg m^2 about COM
    I2: float = 0.02
    # motor-side reflected inertias (rotor + gearbox at the joint)
    J1: float = 5.0
    J2: float = 2.2
    # viscous friction, N m s / rad
    b_l: tuple[float, float] = (0.15, 0.08)   # link side
    b_m: tuple[float, float] = (2.0, 0.9)     # motor side
    # elastic-element damping across each joint spring, N m s / rad.  The
    # actuator is a two-inertia-spring-damper system; without this term the
    # deflection mode at high stiffness rings for seconds.  It cancels in
    # the generalized momentum, so the collision observer never sees it.
    c_s: tuple[float, float] = (5.0, 5.0)
    # operating plane
    alpha: float = 0.0           # tilt from horizontal, rad (0 = horizontal)
    g0: float = 9.81
    # limits and actuator envelope
    theta_min: tuple[float, float] = (0.0, 0.0)                    # rad
    theta_max: tuple[float, float] = (65.0 * DEG, 125.0 * DEG)     # rad
    tau_max: float = 35.0        # motor torque saturation, N m
    omega_max: float = 120.0 * DEG   # joint speed limit, rad/s
    # stiffness actuator
    k_min: float = 70.0          # N m / rad
    k_max: float = 8000.0
    t_stiff: float = 0.450       # full-range stiffness variation time, s
    # joint-limit contact model (stiff unilateral spring-damper)
    k_limit: float = 20000.0     # N m / rad
    c_limit: float = 50.0        # N m s / rad
    # drivetrain Coulomb friction, N m.  Zero in the nominal model (the
    # observer assumes viscous-only friction); the threshold-calibration
    # plant carries the realistic nonzero values so the collision-free
    # residual envelope reflects unmodeled gearbox friction.
    coulomb_m: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        pos = {
            "l1": self.l1, "l2": self.l2, "lc1": self.lc1, "lc2": self.lc2,
            "m1": self.m1, "m2": self.m2, "I1": self.I1, "I2": self.I2,
            "J1": self.J1, "J2": self.J2, "g0": self.g0,
            "tau_max": self.tau_max, "omega_max": self.omega_max,
            "t_stiff": self.t_stiff, "k_limit": self.k_limit,
        }
        for name, value in pos.items():
            if not (value > 0.0 and math.isfinite(value)):
                raise ValueError(f"{name} must be strictly positive, got {value}")
        for name in ("b_l", "b_m", "c_s", "coulomb_m"):
            for i, value in enumerate(getattr(self, name)):
                if value < 0.0 or not math.isfinite(value):
                    raise ValueError(f"{name}[{i}] must be non-negative, got {value}")
        if self.c_limit < 0.0:
            raise ValueError("c_limit must be non-negative")
        if not self.k_min < self.k_max:
            raise ValueError(f"k_min must be below k_max, got {self.k_min} >= {self.k_max}")
        if self.k_min <= 0.0:
            raise ValueError("k_min must be strictly positive")
        if self.lc1 > self.l1 or self.lc2 > self.l2:
            raise ValueError("COM offsets must not exceed link lengths")
        for lo, hi in zip(self.theta_min, self.theta_max):
            if not lo < hi:
                raise ValueError("theta_min must be below theta_max per joint")

    # handy derived values -------------------------------------------------

    @property
    def stiffness_rate(self) -> float:
        """Ramp slope of the stiffness actuator, N m / rad / s."""
        return (self.k_max - self.k_min) / self.t_stiff

    @property
    def motor_inertia(self) -> np.ndarray:
        return np.array([self.J1, self.J2])

    def scaled_inertia(self, factor: float) -> "ArmParams":
        """Copy with all inertial parameters (m, I, J) scaled.

        Used to inject model mismatch for observer threshold calibration.
        """
        return self.replace(
            m1=self.m1 * factor, m2=self.m2 * factor,
            I1=self.I1 * factor, I2=self.I2 * factor,
            J1=self.J1 * factor, J2=self.J2 * factor,
        )

    def replace(self, **changes) -> "ArmParams":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return ArmParams(**values)


def default_params() -> ArmParams:
    """Factory preset: Table-style envelope limits with engineering estimates
    for the quantities the datasheet does not give (masses, inertias,
    friction).  Links are slender carbon-fiber tubes; the reflected motor
    inertias correspond to brushless motors behind 91:1 gearboxes."""
    return ArmParams()
