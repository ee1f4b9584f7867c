"""Configuration loading and validation.

The config file is JSON with SI units except angles, which are degrees at
this boundary (converted to radians on load).  Every section is optional and
falls back to the shipped defaults; invalid values are collected and
reported together with their field paths.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .contact import ContactMedium, StabSetup
from .control import PidGains, TrackingSetup
from .fsm import TaskConfig
from .kinematics import PlanarPose
from .observer import ObserverConfig
from .params import ArmParams
from .workspace import SweepGrid, WorkspaceSpec

SCHEMA_VERSION = 1
DEG = math.pi / 180.0


class ConfigError(ValueError):
    """Carries the list of violated invariants with field paths."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.violations))


@dataclass(frozen=True)
class RateConfig:
    sim_dt: float = 1e-3
    stream_hz: float = 50.0

    def __post_init__(self):
        if self.sim_dt <= 0 or self.stream_hz <= 0:
            raise ValueError("rates must be positive")


@dataclass(frozen=True)
class SimConfig:
    arm: ArmParams
    observer: ObserverConfig
    epsilon_r: tuple[float, float]
    gains: PidGains
    tracking: TrackingSetup
    tracking_target: PlanarPose
    workspace: WorkspaceSpec
    grid: SweepGrid
    task: TaskConfig
    medium: ContactMedium
    stab: StabSetup
    stab_velocities: tuple[float, ...]
    stab_cases: tuple[int, ...]
    rates: RateConfig
    seed: int
    schema_version: int = SCHEMA_VERSION


def _get(d: dict, key: str, default):
    return d[key] if key in d else default


def _pair(v):
    a, b = float(v[0]), float(v[1])
    return (a, b)


def _build_arm(s: dict) -> ArmParams:
    base = ArmParams()
    return ArmParams(
        l1=float(_get(s, "l1_m", base.l1)), l2=float(_get(s, "l2_m", base.l2)),
        lc1=float(_get(s, "lc1_m", base.lc1)), lc2=float(_get(s, "lc2_m", base.lc2)),
        m1=float(_get(s, "m1_kg", base.m1)), m2=float(_get(s, "m2_kg", base.m2)),
        I1=float(_get(s, "I1_kgm2", base.I1)), I2=float(_get(s, "I2_kgm2", base.I2)),
        J1=float(_get(s, "J1_kgm2", base.J1)), J2=float(_get(s, "J2_kgm2", base.J2)),
        b_l=_pair(_get(s, "b_l", base.b_l)), b_m=_pair(_get(s, "b_m", base.b_m)),
        c_s=_pair(_get(s, "c_s", base.c_s)),
        coulomb_m=_pair(_get(s, "coulomb_m", base.coulomb_m)),
        alpha=float(_get(s, "alpha_deg", base.alpha / DEG)) * DEG,
        g0=float(_get(s, "g0", base.g0)),
        theta_min=tuple(np.radians(_pair(_get(s, "theta_min_deg",
                                               np.degrees(base.theta_min))))),
        theta_max=tuple(np.radians(_pair(_get(s, "theta_max_deg",
                                               np.degrees(base.theta_max))))),
        tau_max=float(_get(s, "tau_max_nm", base.tau_max)),
        omega_max=float(_get(s, "omega_max_degps", base.omega_max / DEG)) * DEG,
        k_min=float(_get(s, "k_min", base.k_min)),
        k_max=float(_get(s, "k_max", base.k_max)),
        t_stiff=float(_get(s, "t_stiff_s", base.t_stiff)),
        k_limit=float(_get(s, "k_limit", base.k_limit)),
        c_limit=float(_get(s, "c_limit", base.c_limit)),
    )


def _build_grid(s: dict) -> SweepGrid:
    base = SweepGrid.default()

    def rng(key, default):
        lo, hi, step = (float(x) for x in _get(s, key, default))
        if step <= 0 or hi < lo:
            raise ValueError(f"{key}: bad range [{lo}, {hi}] step {step}")
        return np.arange(lo, hi + 1e-9, step)

    return SweepGrid(
        l1=rng("l1_mm", (base.l1[0], base.l1[-1], base.l1[1] - base.l1[0])),
        l2=rng("l2_mm", (base.l2[0], base.l2[-1], base.l2[1] - base.l2[0])),
        theta1_max_deg=rng("theta1_max_deg", (65.0, 65.0, 5.0)),
        theta2_max_deg=rng("theta2_max_deg", (90.0, 140.0, 5.0)),
    )


def build_config(raw: dict) -> SimConfig:
    violations: list[str] = []

    def section(name, builder, *args):
        try:
            return builder(raw.get(name, {}) if isinstance(raw.get(name, {}), dict)
                           else raw[name], *args)
        except (ValueError, TypeError, KeyError, IndexError) as e:
            violations.append(f"{name}: {e}")
            return None

    version = raw.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        violations.append(f"schema_version: expected {SCHEMA_VERSION}, got {version}")

    arm = section("arm", _build_arm)

    def _obs(s):
        return ObserverConfig(k_o=_pair(_get(s, "k_o", (20.0, 20.0))),
                              epsilon_c=float(_get(s, "epsilon_c", 1.0)),
                              dt=float(_get(s, "dt_s", 1e-3)))
    observer = section("observer", _obs)
    eps_raw = raw.get("observer", {})
    epsilon_r = _pair(_get(eps_raw if isinstance(eps_raw, dict) else {},
                           "epsilon_r", (9.8, 9.4)))

    def _gains(s):
        return PidGains(kp=_pair(_get(s, "kp", (220.0, 90.0))),
                        ki=_pair(_get(s, "ki", (180.0, 75.0))),
                        kd=_pair(_get(s, "kd", (40.0, 16.0))),
                        integral_clamp=float(_get(s, "integral_clamp", 12.0)),
                        d_filter=float(_get(s, "d_filter", 30.0)),
                        feedback=str(_get(s, "feedback", "motor")))
    gains = section("gains", _gains)

    def _tracking(s):
        return TrackingSetup(
            gains=gains or PidGains(), observer=observer or ObserverConfig(),
            epsilon_r=epsilon_r,
            k_high=float(_get(s, "k_high", 8000.0)),
            k_low=float(_get(s, "k_low", 70.0)),
            t_acc=float(_get(s, "t_acc_s", 1.0)),
            t_coast=float(_get(s, "t_coast_s", 4.0)),
            t_dec=float(_get(s, "t_dec_s", 1.0)),
            cart_speed_cap=float(_get(s, "cart_speed_cap_mps", 0.4)),
            settle_time=float(_get(s, "settle_s", 1.0)),
            dt=float(_get(s, "dt_s", 1e-3)))
    tracking = section("tracking", _tracking)
    tracking_target = _pair(_get(raw.get("tracking", {}), "target_mm",
                                 (-23.62, 650.69)))

    def _workspace(s):
        return WorkspaceSpec(
            A=float(_get(s, "A_mm", 327.0)), B=float(_get(s, "B_mm", 240.0)),
            C=float(_get(s, "C_mm", 150.0)), D=float(_get(s, "D_mm", 589.0)),
            E=float(_get(s, "E_mm", 280.0)),
            reach_margin=float(_get(s, "reach_margin_mm", 7.5)),
            psi_span=float(_get(s, "psi_span_deg", 45.5)) * DEG,
            body_radius=float(_get(s, "body_radius_mm", 551.0)),
            body_psi=tuple(np.radians(_pair(_get(s, "body_psi_deg", (0.5, 40.0))))),
        )
    workspace = section("workspace", _workspace)
    grid = section("workspace", lambda s: _build_grid(s.get("grid", {})))

    def _task(s):
        coop = (workspace or WorkspaceSpec()).cooperative_region
        dish = _pair(_get(s, "dish_center_mm", (-23.62, 650.69)))
        return TaskConfig(
            dish_center=PlanarPose(*dish),
            home_pose_deg=_pair(_get(s, "home_pose_deg", (5.0, 10.0))),
            cooperative=coop,
            reached_tol_mm=float(_get(s, "reached_tol_mm", 5.0)),
            reached_speed=float(_get(s, "reached_speed_degps", 0.5)) * DEG)
    task = section("task", _task)

    def _medium(s):
        return ContactMedium(
            surface_s=float(_get(s, "surface_s_m", 0.040)),
            k_c=float(_get(s, "k_c", 5200.0)), c_c=float(_get(s, "c_c", 55.0)),
            F_y=float(_get(s, "F_y", 36.0)),
            depth_limit=float(_get(s, "depth_limit_m", 0.060)))
    medium = section("medium", _medium)

    def _stab(s):
        return StabSetup(
            start=PlanarPose(*_pair(_get(s, "start_mm", (-23.62, 650.69)))),
            direction=_pair(_get(s, "direction", (0.0, 1.0))),
            approach_accel=float(_get(s, "approach_accel_mps2", 3.0)),
            overtravel=float(_get(s, "overtravel_m", 0.25)),
            epsilon_r=epsilon_r, gains=gains or PidGains(),
            observer=observer or ObserverConfig())
    stab = section("stab", _stab)
    stab_raw = raw.get("stab", {})
    velocities = tuple(float(v) for v in _get(stab_raw, "velocities_mps",
                                              (0.2, 0.3, 0.4, 0.48, 0.6, 0.8)))
    cases = tuple(int(c) for c in _get(stab_raw, "cases", (1, 2, 3)))

    def _rates(s):
        return RateConfig(sim_dt=float(_get(s, "sim_dt_s", 1e-3)),
                          stream_hz=float(_get(s, "stream_hz", 50.0)))
    rates = section("rates", _rates)
    seed = int(raw.get("seeds", {}).get("master", 20240817)) \
        if isinstance(raw.get("seeds", {}), dict) else 20240817

    if violations:
        raise ConfigError(violations)

    return SimConfig(arm=arm, observer=observer, epsilon_r=epsilon_r, gains=gains,
                     tracking=tracking, tracking_target=PlanarPose(*tracking_target),
                     workspace=workspace, grid=grid, task=task,
                     medium=medium, stab=stab, stab_velocities=velocities,
                     stab_cases=cases, rates=rates, seed=seed,
                     schema_version=SCHEMA_VERSION)


def arm_to_config(params: ArmParams) -> dict:
    """The `arm` config section for these parameters (degrees at the
    boundary); load_config(. . .)[arm] round-trips exactly."""
    return {
        "l1_m": params.l1, "l2_m": params.l2,
        "lc1_m": params.lc1, "lc2_m": params.lc2,
        "m1_kg": params.m1, "m2_kg": params.m2,
        "I1_kgm2": params.I1, "I2_kgm2": params.I2,
        "J1_kgm2": params.J1, "J2_kgm2": params.J2,
        "b_l": list(params.b_l), "b_m": list(params.b_m),
        "c_s": list(params.c_s), "coulomb_m": list(params.coulomb_m),
        "alpha_deg": params.alpha / DEG, "g0": params.g0,
        "theta_min_deg": [v / DEG for v in params.theta_min],
        "theta_max_deg": [v / DEG for v in params.theta_max],
        "tau_max_nm": params.tau_max,
        "omega_max_degps": params.omega_max / DEG,
        "k_min": params.k_min, "k_max": params.k_max,
        "t_stiff_s": params.t_stiff,
        "k_limit": params.k_limit, "c_limit": params.c_limit,
    }


def load_config(path: str | Path) -> SimConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError([f"config file not found: {path}"])
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError([f"JSON parse error: {e}"]) from e
    if not isinstance(raw, dict):
        raise ConfigError(["top level must be a JSON object"])
    return build_config(raw)


def default_config() -> SimConfig:
    with resources.files("vsarm.data").joinpath("default.json").open() as f:
        return build_config(json.load(f))
