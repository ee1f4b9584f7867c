"""Interactive simulation session: plant, observer, controller and task FSM
advanced together at the simulation rate.

One Session object owns all mutable state and is advanced tick by tick from
a single thread.  Commands (operator buttons, retargeting, pause/resume) are
applied between ticks in arrival order; state snapshots are plain dicts and
safe to hand to any transport.

Batch mode replays a timestamped event script as fast as possible and is
bitwise deterministic; serve mode (see server) paces the same loop against
the wall clock and broadcasts snapshots at the stream rate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import dynamics as dyn, observer as om, trajectory as tj
from .config import SimConfig
from .contact import ReactionStrategy, apply_reaction
from .control import PidState, motor_reference, pid_step
from .fsm import (COLLISION, REACHED, ButtonEvent, FsmCommands, Phase,
                  TaskState, clamp_to_cooperative, commands_for, fsm_step,
                  target_reached)
from .kinematics import (JointLimitError, PlanarPose, UnreachableError,
                         forward_kinematics, inverse_kinematics)
from .logs import SESSION_COLUMNS, _fmt


class CommandError(ValueError):
    """Malformed or unknown command; the session continues."""


@dataclass
class SessionLog:
    rows: list = field(default_factory=list)

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as f:
            f.write(",".join(SESSION_COLUMNS) + "\n")
            for row in self.rows:
                f.write(",".join(row) + "\n")
        return path


class Session:
    """Single-owner simulation loop with queued command input."""

    _ZERO2 = np.zeros(2)

    def __init__(self, config: SimConfig, log_rows: bool = True):
        self.config = config
        self.params = config.arm
        self.dt = config.rates.sim_dt
        self.task_cfg = config.task
        self.paused = False
        self.speed_scale = 1.0
        self.log = SessionLog() if log_rows else None

        theta0 = np.radians(config.task.home_pose_deg)
        self.state = dyn.rest_state(self.params, theta0,
                                    k=np.full(2, self.params.k_max))
        self.obs = om.init_observer(self.params, self.state,
                                    epsilon_r=np.asarray(config.epsilon_r))
        self.pid = PidState()
        self.task = TaskState()
        self.commands: FsmCommands = commands_for(self.task)
        self.reaction = ReactionStrategy.ZERO_TORQUE_SOFTEN

        self._profiles = None          # active transit profiles
        self._profile_t0 = 0.0
        self._hold_ref = theta0.copy()   # joint reference while at rest
        self._last_q_d = theta0.copy()
        self._last_tau = np.zeros(2)
        self._requested_target: Optional[PlanarPose] = None
        self._clamped_target: Optional[PlanarPose] = None
        self._saturated = np.zeros(2, dtype=bool)
        self._limit_hit = np.zeros(2, dtype=bool)

    # -- command handling ---------------------------------------------------

    def handle_command(self, msg: dict) -> dict:
        """Apply one CommandMessage (already decoded).  Returns a reply."""
        try:
            kind = msg.get("type")
            if kind == "button":
                bid = msg.get("id")
                value = msg.get("value")
                if bid not in ("B1", "B2", "B3") or not isinstance(value, bool):
                    raise CommandError(f"bad button command: {msg}")
                self._apply_fsm_event(ButtonEvent(bid, value, t=self.state.t))
            elif kind == "set_target":
                try:
                    x, y = float(msg["x_mm"]), float(msg["y_mm"])
                except (KeyError, TypeError, ValueError) as e:
                    raise CommandError(f"bad set_target: {msg}") from e
                self._set_target(PlanarPose(x, y))
            elif kind == "reset":
                self.obs = om.reset_detection(self.obs)
                if self.task.faulted:
                    self.task = self.task.replace(faulted=False)
                    self.commands = commands_for(self.task)
                    self._hold_current()
            elif kind == "pause":
                self.paused = True
            elif kind == "resume":
                self.paused = False
            elif kind == "set_speed_scale":
                try:
                    scale = float(msg["value"])
                except (KeyError, TypeError, ValueError) as e:
                    raise CommandError(f"bad set_speed_scale: {msg}") from e
                if not 0.05 <= scale <= 1.0:
                    raise CommandError("speed scale must be in [0.05, 1.0]")
                self.speed_scale = scale
            else:
                raise CommandError(f"unknown command type: {msg.get('type')!r}")
        except CommandError as e:
            return {"type": "error", "message": str(e)}
        return {"type": "ack", "command": msg.get("type"),
                "clamped_target": None if self._clamped_target is None else
                [self._clamped_target.x, self._clamped_target.y]}

    def _set_target(self, requested: PlanarPose):
        self._requested_target = requested
        clamped = clamp_to_cooperative(requested, self.task_cfg)
        self._clamped_target = clamped
        if self.task.faulted:
            return
        if self.task.phase is Phase.S2_AT_DISH:
            self.task = self.task.replace(in_transit=True, target=clamped)
            self.commands = commands_for(self.task)
            self._begin_transit(clamped)
        # in setting mode the clamped target acts as the guiding hand: the
        # tick applies a gentle virtual grasp pulling the free arm toward it

    def _apply_fsm_event(self, event):
        ee = self._current_ee()
        prev = self.task
        self.task, self.commands = fsm_step(self.task, event, self.task_cfg,
                                            self.params, current_ee=ee)
        if self.task.in_transit and self.commands.target is not None and (
                not prev.in_transit or prev.target != self.commands.target):
            self._begin_transit(self.commands.target)
        if not self.task.in_transit and prev.in_transit:
            self._hold_current()
        if self.task.phase is Phase.S3_SETTING:
            self._profiles = None

    def _begin_transit(self, target: PlanarPose):
        l1, l2 = self.params.l1 * 1000.0, self.params.l2 * 1000.0
        limits = list(zip(self.params.theta_min, self.params.theta_max))
        try:
            theta_f = inverse_kinematics(l1, l2, target, limits=limits)
        except (UnreachableError, JointLimitError):
            # targets are clamped into the cooperative region, so this only
            # triggers for a misconfigured home pose; hold instead of moving
            self._profiles = None
            self._hold_current()
            return
        v = self.params.omega_max * 0.45 * self.speed_scale
        a = v / 0.6
        profiles = [tj.plan_trapezoid(float(self.state.theta[j]), float(theta_f[j]),
                                      v, a) for j in range(2)]
        profiles, _ = tj.cap_cartesian_speed(
            profiles, l1, l2, self.config.tracking.cart_speed_cap * self.speed_scale)
        self._profiles = profiles
        self._profile_t0 = self.state.t
        self.pid = PidState()

    def _hold_current(self):
        self._profiles = None
        self._hold_ref = self.state.theta.copy()
        self.pid = PidState()

    def _current_ee(self) -> PlanarPose:
        return forward_kinematics(self.params.l1 * 1000.0,
                                  self.params.l2 * 1000.0, self.state.theta)

    # -- the tick -----------------------------------------------------------

    def tick(self):
        """Advance simulated time by one dt (no-op while paused)."""
        if self.paused:
            return

        # transit progress -> FSM status events
        if self.task.in_transit and self.task.target is not None:
            if target_reached(self.params, self.state, self.task.target,
                              self.task_cfg):
                self._apply_fsm_event(REACHED)
        # detection is armed during transit only: in setting mode the user
        # is deliberately touching the arm, and at stiff rest the holding
        # regulator owns disturbance rejection
        if self.obs.event is not None:
            if self.task.in_transit:
                self._apply_fsm_event(COLLISION)
            elif not self.task.faulted:
                self.obs = om.reset_detection(self.obs)

        # reference for this tick
        if self._profiles is not None:
            tau_rel = self.state.t - self._profile_t0
            qs = [tj.sample(p, tau_rel) for p in self._profiles]
            q_d = np.array([qs[0][0], qs[1][0]])
            qdot_d = np.array([qs[0][1], qs[1][1]])
        else:
            q_d = self._hold_ref
            qdot_d = np.zeros(2)
        self._last_q_d = q_d

        k_cmd = np.full(2, self.config.tracking.k_high
                        if self.commands.stiffness_mode == "high"
                        else self.config.tracking.k_low)

        if self.commands.torque_mode == "zero" or self.task.faulted:
            tau = np.zeros(2)
            if self.task.faulted:
                tau, self.state = apply_reaction(self.reaction, self.params,
                                                 self.state)
                k_cmd = self.state.k_target
        else:
            ref = motor_reference(self.params, q_d, k_cmd)
            tau, self.pid = pid_step(self.config.gains, self.pid, ref, qdot_d,
                                     self.state.phi, self.state.phi_dot,
                                     self.dt, self.params.tau_max)
        self._last_tau = tau

        self.obs = om.observer_step(self.config.observer, self.obs,
                                    self.params, self.state, tau)

        if self.log is not None:
            self.log.rows.append(self._log_row(q_d, tau))

        tau_ext = self._hand_guidance() if (
            self.task.phase is Phase.S3_SETTING
            and self._clamped_target is not None) else self._ZERO2
        self.state, self._saturated, self._limit_hit = dyn.step(
            self.params, self.state, tau, tau_ext, self.dt, k_target=k_cmd)

    _HAND_STIFFNESS = 250.0    # N/m, virtual grasp in setting mode
    _HAND_DAMPING = 40.0       # N s/m
    _HAND_FORCE_CAP = 30.0     # N

    def _hand_guidance(self) -> np.ndarray:
        """External torque of the operator's hand pulling the zero-torque arm
        toward the dragged target during setting mode."""
        from .kinematics import jacobian
        l1, l2 = self.params.l1 * 1000.0, self.params.l2 * 1000.0
        ee = self._current_ee()
        J = jacobian(l1, l2, self.state.theta) / 1000.0   # m/rad
        err = np.array([self._clamped_target.x - ee.x,
                        self._clamped_target.y - ee.y]) / 1000.0
        vel = J @ self.state.theta_dot
        force = self._HAND_STIFFNESS * err - self._HAND_DAMPING * vel
        norm = float(np.hypot(force[0], force[1]))
        if norm > self._HAND_FORCE_CAP:
            force *= self._HAND_FORCE_CAP / norm
        return J.T @ force

    def _log_row(self, q_d, tau):
        deg = math.degrees
        s = self.state
        ee = self._current_ee()
        eps = self.obs.epsilon_r
        return [
            _fmt(s.t),
            _fmt(deg(q_d[0])), _fmt(deg(q_d[1])),
            _fmt(deg(s.theta[0])), _fmt(deg(s.theta[1])),
            _fmt(deg(s.phi[0])), _fmt(deg(s.phi[1])),
            _fmt(s.k[0]), _fmt(s.k[1]),
            _fmt(tau[0]), _fmt(tau[1]),
            _fmt(self.obs.r[0]), _fmt(self.obs.r[1]),
            _fmt(ee.x), _fmt(ee.y),
            _fmt(eps[0]), _fmt(eps[1]),
            self.task.phase.value,
            "1" if self.task.in_transit else "0",
            "1" if self.task.knife_on else "0",
            "1" if self.obs.event is not None else "0",
            "1" if self._saturated.any() else "0",
            "1" if self._limit_hit.any() else "0",
        ]

    def state_message(self) -> dict:
        s = self.state
        ee = self._current_ee()
        return {
            "type": "state",
            "t": s.t,
            "theta_deg": [math.degrees(s.theta[0]), math.degrees(s.theta[1])],
            "phi_deg": [math.degrees(s.phi[0]), math.degrees(s.phi[1])],
            "k": [float(s.k[0]), float(s.k[1])],
            "ee_mm": [ee.x, ee.y],
            "r": [float(self.obs.r[0]), float(self.obs.r[1])],
            "epsilon_r": [float(v) for v in self.obs.epsilon_r],
            "fsm_state": self.task.phase.value,
            "in_transit": self.task.in_transit,
            "knife": self.task.knife_on,
            "paused": self.paused,
            "target_mm": None if self.task.target is None else
                [self.task.target.x, self.task.target.y],
            "requested_target_mm": None if self._requested_target is None else
                [self._requested_target.x, self._requested_target.y],
            "clamped_target_mm": None if self._clamped_target is None else
                [self._clamped_target.x, self._clamped_target.y],
            "flags": {
                "detected": self.obs.event is not None,
                "faulted": self.task.faulted,
                "saturated": bool(self._saturated.any()),
                "limit_hit": bool(self._limit_hit.any()),
            },
        }


def load_event_script(path: str | Path) -> list[dict]:
    """JSON-lines event script: one {"t": s, "button": "B1", "value": bool}
    or {"t": s, "command": {...}} object per line."""
    events = []
    for i, line in enumerate(Path(path).read_text().splitlines()):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise ValueError(f"event script line {i + 1}: {e}") from e
        if "t" not in obj:
            raise ValueError(f"event script line {i + 1}: missing 't'")
        events.append(obj)
    return sorted(events, key=lambda e: float(e["t"]))


def run_batch(config: SimConfig, duration: float,
              events: list[dict] | None = None) -> tuple[Session, SessionLog]:
    """As-fast-as-possible session run with a timestamped event script."""
    session = Session(config)
    events = sorted(events or [], key=lambda e: float(e["t"]))
    idx = 0
    n = int(round(duration / session.dt))
    for _ in range(n):
        while idx < len(events) and float(events[idx]["t"]) <= session.state.t + 1e-12:
            ev = events[idx]
            idx += 1
            if "button" in ev:
                session.handle_command({"type": "button", "id": ev["button"],
                                        "value": bool(ev["value"])})
            elif "command" in ev:
                session.handle_command(ev["command"])
        session.tick()
    return session, session.log
