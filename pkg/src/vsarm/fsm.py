"""Finite state machine of the bimanual eating task, plus homing.

States:
  S1  home position (stiff at rest; transit back home when commanded)
  S2  at the dish (stiff at rest, soft while moving there)
  S3  setting mode: zero torque, the user hand-places the end-effector
  S4  cutting: knife reciprocation while the foot button is held

Operator inputs: B1 (latched: on = go to the dish, off = go home),
B2 (latched: setting mode), B3 (momentary: cut while held).

Stiffness contract: soft while in transit, stiff whenever at rest in S1/S2;
S3 commands zero motor torque (and stays soft for safety); S4 keeps the
arm stiff at the dish while the blade reciprocates.

A collision detection during transit stops the arm (reaction strategy owns
the override) and faults the machine; the operator acknowledges by switching
B1 off, which sends the arm home, and may then restart with B1 on.

Undefined (state, event) pairs are ignored with a logged warning: the
machine is total.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import dynamics as dyn, trajectory as tj
from .control import PidGains, PidState, motor_reference, pid_step
from .kinematics import PlanarPose, forward_kinematics
from .params import ArmParams
from .workspace import AnnularSector

log = logging.getLogger(__name__)


class Phase(enum.Enum):
    S1_HOME = "S1"
    S2_AT_DISH = "S2"
    S3_SETTING = "S3"
    S4_CUTTING = "S4"


@dataclass(frozen=True)
class ButtonEvent:
    button: str       # "B1" | "B2" | "B3"
    value: bool       # latched state for B1/B2, pressed/released for B3
    t: float = 0.0

    def __post_init__(self):
        if self.button not in ("B1", "B2", "B3"):
            raise ValueError(f"unknown button {self.button!r}")


REACHED = "reached"       # transit target attained
COLLISION = "collision"   # detection latched during transit


@dataclass(frozen=True)
class TaskConfig:
    dish_center: PlanarPose = PlanarPose(-23.62, 650.69)
    home_pose_deg: tuple[float, float] = (5.0, 10.0)
    cooperative: AnnularSector = AnnularSector(574.5, 724.5, 0.0, np.radians(45.5))
    reached_tol_mm: float = 5.0
    reached_speed: float = np.radians(0.5)   # rad/s

    def __post_init__(self):
        if not self.cooperative.contains(self.dish_center.x, self.dish_center.y):
            raise ValueError("dish center must lie in the cooperative region")

    def home_ee(self, params: ArmParams) -> PlanarPose:
        return forward_kinematics(params.l1 * 1000.0, params.l2 * 1000.0,
                                  np.radians(self.home_pose_deg))


@dataclass(frozen=True)
class TaskState:
    phase: Phase = Phase.S1_HOME
    in_transit: bool = False
    faulted: bool = False
    knife_on: bool = False
    target: Optional[PlanarPose] = None    # transit destination

    def replace(self, **changes) -> "TaskState":
        return replace(self, **changes)


@dataclass(frozen=True)
class FsmCommands:
    """What the motion layer must do for the current state."""

    stiffness_mode: str     # "high" | "low"
    torque_mode: str        # "pid" | "zero"
    knife: bool
    target: Optional[PlanarPose]


def commands_for(state: TaskState) -> FsmCommands:
    if state.faulted or state.phase is Phase.S3_SETTING:
        torque = "zero"
    else:
        torque = "pid"
    if state.in_transit or state.phase is Phase.S3_SETTING or state.faulted:
        stiffness = "low"
    else:
        stiffness = "high"
    return FsmCommands(stiffness_mode=stiffness, torque_mode=torque,
                       knife=state.knife_on, target=state.target)


def clamp_to_cooperative(pos: PlanarPose, config: TaskConfig) -> PlanarPose:
    """Nearest point of the cooperative region (identity when inside)."""
    return config.cooperative.project(pos)


def fsm_step(state: TaskState, event, config: TaskConfig,
             params: ArmParams, current_ee: Optional[PlanarPose] = None):
    """One transition.  ``event`` is a ButtonEvent or one of REACHED /
    COLLISION.  Returns (new TaskState, FsmCommands)."""
    new = state

    if isinstance(event, ButtonEvent):
        b, v = event.button, event.value
        if state.faulted:
            if b == "B1" and not v:
                new = TaskState(phase=Phase.S1_HOME, in_transit=True,
                                target=config.home_ee(params))
            else:
                log.warning("fsm: ignoring %s=%s while faulted", b, v)
        elif b == "B1":
            if v and state.phase is Phase.S1_HOME:
                new = TaskState(phase=Phase.S2_AT_DISH, in_transit=True,
                                target=clamp_to_cooperative(config.dish_center, config))
            elif not v and state.phase is not Phase.S1_HOME:
                # from anywhere: knife off, zero-torque modes exit, go home
                new = TaskState(phase=Phase.S1_HOME, in_transit=True,
                                target=config.home_ee(params))
            else:
                log.warning("fsm: ignoring B1=%s in %s", v, state.phase.value)
        elif b == "B2":
            if v and state.phase is Phase.S2_AT_DISH and not state.in_transit:
                new = TaskState(phase=Phase.S3_SETTING)
            elif not v and state.phase is Phase.S3_SETTING:
                if current_ee is None:
                    raise ValueError("leaving setting mode needs the current EE pose")
                target = clamp_to_cooperative(current_ee, config)
                new = TaskState(phase=Phase.S2_AT_DISH, in_transit=True, target=target)
            else:
                log.warning("fsm: ignoring B2=%s in %s", v, state.phase.value)
        elif b == "B3":
            if v and state.phase is Phase.S2_AT_DISH and not state.in_transit:
                new = TaskState(phase=Phase.S4_CUTTING, knife_on=True,
                                target=state.target)
            elif not v and state.phase is Phase.S4_CUTTING:
                new = TaskState(phase=Phase.S2_AT_DISH, knife_on=False,
                                target=state.target)
            else:
                log.warning("fsm: ignoring B3=%s in %s", v, state.phase.value)
    elif event == REACHED:
        if state.in_transit:
            new = state.replace(in_transit=False, target=None)
        else:
            log.warning("fsm: 'reached' while not in transit (%s)", state.phase.value)
    elif event == COLLISION:
        if state.in_transit:
            new = TaskState(phase=Phase.S1_HOME, faulted=True)
        else:
            log.warning("fsm: collision status outside transit (%s)", state.phase.value)
    else:
        log.warning("fsm: unknown event %r", event)

    return new, commands_for(new)


def target_reached(params: ArmParams, arm: dyn.ArmState, target: PlanarPose,
                   config: TaskConfig) -> bool:
    ee = forward_kinematics(params.l1 * 1000.0, params.l2 * 1000.0, arm.theta)
    return (ee.distance_to(target) <= config.reached_tol_mm
            and np.all(np.abs(arm.theta_dot) < config.reached_speed))


# ---------------------------------------------------------------------------
# homing routine
# ---------------------------------------------------------------------------

@dataclass
class HomingResult:
    state: dyn.ArmState
    offset_estimate: np.ndarray   # rad, estimated incremental-encoder offset
    limits_seen: np.ndarray       # bool per joint
    duration: float               # s


def home(params: ArmParams, state: dyn.ArmState,
         encoder_offset=(0.0, 0.0), home_pose_deg=(5.0, 10.0),
         gains: PidGains | None = None, speed: float = np.radians(8.0),
         timeout: float = 30.0, dt: float = 1e-3) -> HomingResult:
    """Drive both joints slowly into the lower limit switches, zero the
    incremental-encoder reference there, then move to the home pose.

    ``encoder_offset`` injects a misalignment between the measured and true
    angles; homing absorbs it because the limit switches are absolute.
    """
    gains = gains or PidGains()
    offset = np.asarray(encoder_offset, dtype=float)
    seen = np.zeros(2, dtype=bool)
    contact_measured = np.zeros(2)

    # stiff joints make the motor ramp drag the links onto the switches
    state = state.replace(k_target=np.full(2, params.k_max))
    pid = PidState()
    phi_ref = state.phi.copy()
    t0 = state.t
    steps = int(round(timeout / dt))
    for _ in range(steps):
        if seen.all():
            break
        drive = np.where(seen, 0.0, -speed)
        phi_ref = phi_ref + drive * dt
        tau, pid = pid_step(gains, pid, phi_ref, drive, state.phi,
                            state.phi_dot, dt, params.tau_max)
        state, _, hit = dyn.step(params, state, tau, np.zeros(2), dt)
        for j in range(2):
            if hit[j] and not seen[j]:
                seen[j] = True
                contact_measured[j] = state.theta[j] + offset[j]
                phi_ref[j] = state.phi[j]
    if not seen.all():
        raise TimeoutError("homing did not reach both limit switches")

    # at contact the true link angle is theta_min: the measured value there
    # is the encoder offset (plus the small limiter indentation)
    offset_estimate = contact_measured - np.asarray(params.theta_min)

    # move to the home pose with the corrected reference
    home_theta = np.radians(home_pose_deg)
    profiles = [tj.plan_trapezoid(float(state.theta[j]), float(home_theta[j]),
                                  np.radians(20.0), np.radians(40.0))
                for j in range(2)]
    t_total = max(p.t_total for p in profiles) + 0.5
    pid = PidState()
    k_cmd = np.full(2, params.k_max)
    n = int(round(t_total / dt))
    for i in range(n):
        t = i * dt
        q_ref = np.array([tj.sample(p, t)[0] for p in profiles])
        qdot_ref = np.array([tj.sample(p, t)[1] for p in profiles])
        tau, pid = pid_step(gains, pid, motor_reference(params, q_ref, k_cmd),
                            qdot_ref, state.phi, state.phi_dot, dt, params.tau_max)
        state, _, _ = dyn.step(params, state, tau, np.zeros(2), dt)
    return HomingResult(state=state, offset_estimate=offset_estimate,
                        limits_seen=seen, duration=state.t - t0)
