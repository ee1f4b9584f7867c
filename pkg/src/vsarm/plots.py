"""Figure rendering for the CLI report paths.

Every CLI command that writes delimited output can also render the matching
figure next to it.  Rendering uses the Agg backend so it works headless.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .workspace import WorkspaceSpec, reachable_workspace

REGION_COLORS = {
    "cooperative": "#2ca02c",   # green
    "extensive": "#1f77b4",     # blue
    "human": "#d62728",         # red
    "main": "#000000",          # black outline
}


def _sector_patch(ax, sector, **kwargs):
    psi = np.linspace(sector.psi_lo, sector.psi_hi, 64)
    inner = np.column_stack([-sector.r_lo * np.sin(psi), sector.r_lo * np.cos(psi)])
    outer = np.column_stack([-sector.r_hi * np.sin(psi[::-1]),
                             sector.r_hi * np.cos(psi[::-1])])
    poly = np.vstack([inner, outer])
    ax.fill(poly[:, 0], poly[:, 1], **kwargs)


def plot_workspace(result, spec: WorkspaceSpec, path: str | Path,
                   grid_step_deg: float = 1.0) -> Path:
    """Top view: reachable cloud of the winning design over the scene."""
    fig, ax = plt.subplots(figsize=(7, 7))
    pts = reachable_workspace(result.l1, result.l2,
                              ((0.0, result.theta1_max), (0.0, result.theta2_max)),
                              grid_step_deg)
    ax.scatter(pts[:, 0], pts[:, 1], s=1, c=REGION_COLORS["extensive"],
               alpha=0.25, label="reachable (extensive)")
    _sector_patch(ax, spec.human_region, color=REGION_COLORS["human"],
                  alpha=0.5, label="human zone")
    _sector_patch(ax, spec.cooperative_region, color=REGION_COLORS["cooperative"],
                  alpha=0.55, label="cooperative zone")
    m = spec.main_region
    psi = np.linspace(m.psi_lo, m.psi_hi, 64)
    for r in (m.r_lo, m.r_hi):
        ax.plot(-r * np.sin(psi), r * np.cos(psi), color=REGION_COLORS["main"], lw=1.2)
    for p in (m.psi_lo, m.psi_hi):
        ax.plot([-m.r_lo * math.sin(p), -m.r_hi * math.sin(p)],
                [m.r_lo * math.cos(p), m.r_hi * math.cos(p)],
                color=REGION_COLORS["main"], lw=1.2)
    ax.plot(0, 0, "k^", markersize=10, label="base")
    ax.set_title(f"optimized workspace: l1={result.l1:.0f} mm, l2={result.l2:.0f} mm, "
                 f"limits ({result.theta1_max:.0f}, {result.theta2_max:.0f}) deg")
    ax.set_xlabel("x [mm]")
    ax.set_ylabel("y [mm]")
    ax.set_aspect("equal")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def plot_tracking(log, path: str | Path) -> Path:
    """Joint tracking and stiffness switching, one panel per joint."""
    fig, axes = plt.subplots(2, 1, figsize=(8, 7), sharex=True)
    for j, ax in enumerate(axes):
        ax.plot(log.t, np.degrees(log.q_d[:, j]), "k--", lw=1.0, label="desired")
        ax.plot(log.t, np.degrees(log.q[:, j]), "C0", lw=1.0, label="actual")
        ax.set_ylabel(f"joint {j + 1} [deg]")
        twin = ax.twinx()
        twin.plot(log.t, log.k[:, j], "C3", lw=0.9, alpha=0.7)
        twin.set_ylabel("stiffness [N m/rad]", color="C3")
        twin.set_yscale("log")
        if j == 0:
            ax.legend(loc="lower right", fontsize=8)
    axes[-1].set_xlabel("t [s]")
    fig.suptitle("trajectory tracking with online stiffness switching")
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def plot_stab_sweep(results, path: str | Path) -> Path:
    """Penetration depth (left axis) and force (right axis) vs velocity."""
    fig, ax = plt.subplots(figsize=(8, 5))
    ax2 = ax.twinx()
    styles = {1: ("C0", "o"), 2: ("C3", "s"), 3: ("C1", "^")}
    for case in sorted({r.case_id for r in results}):
        rows = sorted((r for r in results if r.case_id == case),
                      key=lambda r: r.velocity)
        v = [r.velocity for r in rows]
        c, m = styles.get(case, ("C4", "x"))
        ax.plot(v, [r.d_p for r in rows], color=c, marker=m, lw=1.4,
                label=f"case {case} depth")
        ax2.plot(v, [r.F_p for r in rows], color=c, marker=m, lw=1.0, ls="--",
                 alpha=0.65)
    ax.set_xlabel("end-effector velocity [m/s]")
    ax.set_ylabel("penetration depth [mm]")
    ax2.set_ylabel("peak force [N] (dashed)")
    ax.legend(loc="upper left", fontsize=8)
    ax.set_title("stab outcome vs velocity (solid: depth, dashed: force)")
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def plot_session(csv_columns: dict, path: str | Path) -> Path:
    """End-effector path and residuals of a session CSV."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 5))
    ax1.plot(csv_columns["x"], csv_columns["y"], "C0", lw=1.0)
    ax1.plot(csv_columns["x"][0], csv_columns["y"][0], "go", label="start")
    ax1.plot(csv_columns["x"][-1], csv_columns["y"][-1], "rs", label="end")
    ax1.set_xlabel("x [mm]")
    ax1.set_ylabel("y [mm]")
    ax1.set_aspect("equal")
    ax1.set_title("end-effector path")
    ax1.legend(fontsize=8)
    t = csv_columns["t"]
    for j in (1, 2):
        ax2.plot(t, csv_columns[f"r{j}"], lw=0.9, label=f"r{j}")
        ax2.plot(t, csv_columns[f"eps_r{j}"], "k:", lw=0.8)
        ax2.plot(t, -csv_columns[f"eps_r{j}"], "k:", lw=0.8)
    ax2.set_xlabel("t [s]")
    ax2.set_ylabel("residual [N m]")
    ax2.set_title("observer residuals and thresholds")
    ax2.legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
