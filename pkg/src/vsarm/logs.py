"""CSV and summary exports with a fixed, documented column schema.

Angles are exported in degrees, stiffness in N m/rad, torques and residuals
in N m, positions in mm.  Floats are written in shortest round-trip form so
re-reading a CSV reproduces the in-memory series exactly and repeated runs
produce bitwise-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .control import TrajectoryLog
from .kinematics import PlanarPose

TRACK_COLUMNS = ["t", "q1_d", "q2_d", "q1", "q2", "phi1", "phi2", "k1", "k2",
                 "tau1", "tau2", "r1", "r2", "x", "y", "eps_r1", "eps_r2"]

SESSION_COLUMNS = TRACK_COLUMNS + ["fsm_state", "in_transit", "knife",
                                   "detected", "saturated", "limit_hit"]

STAB_COLUMNS = ["case", "velocity_mps", "F_p_N", "d_p_mm", "detected_at_s"]


def _fmt(v) -> str:
    f = float(v)
    if math.isnan(f):
        return "nan"
    return repr(f)


def track_rows(log: TrajectoryLog):
    deg = np.degrees
    for i in range(len(log.t)):
        yield [
            _fmt(log.t[i]),
            _fmt(deg(log.q_d[i, 0])), _fmt(deg(log.q_d[i, 1])),
            _fmt(deg(log.q[i, 0])), _fmt(deg(log.q[i, 1])),
            _fmt(deg(log.phi[i, 0])), _fmt(deg(log.phi[i, 1])),
            _fmt(log.k[i, 0]), _fmt(log.k[i, 1]),
            _fmt(log.tau[i, 0]), _fmt(log.tau[i, 1]),
            _fmt(log.r[i, 0]), _fmt(log.r[i, 1]),
            _fmt(log.ee[i, 0]), _fmt(log.ee[i, 1]),
            _fmt(log.epsilon_r[0]), _fmt(log.epsilon_r[1]),
        ]


def export_csv(log: TrajectoryLog, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(TRACK_COLUMNS)
        w.writerows(track_rows(log))
    return path


def read_csv(path: str | Path):
    """Columns back as a dict of float arrays (strings preserved as-is)."""
    with Path(path).open() as f:
        reader = csv.reader(f)
        header = next(reader)
        rows = list(reader)
    out = {}
    for j, name in enumerate(header):
        col = [row[j] for row in rows]
        try:
            out[name] = np.array([float(v) for v in col])
        except ValueError:
            out[name] = np.array(col)
    return out


def export_summary(log: TrajectoryLog, path: str | Path,
                   target: PlanarPose | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rms = log.rms_error_deg()
    mab = log.max_abs_error_deg()
    summary = {
        "samples": int(len(log.t)),
        "duration_s": float(log.t[-1]) if len(log.t) else 0.0,
        "rms_error_deg": [float(rms[0]), float(rms[1])],
        "max_abs_error_deg": [float(mab[0]), float(mab[1])],
        "max_abs_residual_nm": [float(v) for v in log.max_abs_residual()],
        "epsilon_r_nm": [float(v) for v in log.epsilon_r],
        "saturated_ticks": int(np.count_nonzero(log.saturated.any(axis=1))),
        "limit_hit_ticks": int(np.count_nonzero(log.limit_hit.any(axis=1))),
        "detection": None if log.detection is None else {
            "time_s": log.detection.time,
            "joint_index": log.detection.joint_index,
            "residual_nm": log.detection.residual_value,
        },
    }
    if target is not None:
        summary["target_mm"] = [target.x, target.y]
        summary["final_cartesian_error_mm"] = log.final_cartesian_error_mm(target)
    path.write_text(json.dumps(summary, indent=2) + "\n")
    return path


def export_stab_csv(results, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(STAB_COLUMNS)
        for r in results:
            w.writerow([r.case_id, _fmt(r.velocity), _fmt(r.F_p), _fmt(r.d_p),
                        "" if r.detected_at is None else _fmt(r.detected_at)])
    return path


def export_workspace_result(result, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "l1_mm": result.l1, "l2_mm": result.l2,
        "theta1_max_deg": result.theta1_max, "theta2_max_deg": result.theta2_max,
        "area_W_mm2": result.area_W, "feasible": result.feasible,
    }
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path


def export_occupancy_csv(points, labels, path: str | Path) -> Path:
    """Workspace occupancy samples (x_mm, y_mm, region_label) for plotting."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["x_mm", "y_mm", "region_label"])
        for (x, y), lab in zip(points, labels):
            w.writerow([_fmt(x), _fmt(y), lab])
    return path
