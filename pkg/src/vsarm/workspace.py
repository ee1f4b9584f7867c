"""Workspace geometry and the brute-force link-length / joint-limit optimizer.

The task scene is encoded as annular sectors in the base frame.  Bearings
``psi`` are measured from +y toward -x (the side the elbow folds to, where
the seated user is), radii in mm:

* main zone      -- the band the shared meal happens in: radius
                    [A+B, A+B+C] pushed out by a small fold-clearance margin,
                    bearings [-psi_span, +psi_span].
* cooperative    -- the half of the main zone on the arm's fold side
                    (bearings [0, +psi_span]); this is the region the
                    end-effector must cover.
* human zone     -- the torso/head volume leaning over the table: radius
                    [0, body_radius] over bearings [body_psi_lo, body_psi_hi].
                    No part of link 2 or the end-effector may enter it.

The published drawing of this scene is pictorial, so the angular span, the
clearance margin and the body radius are calibration constants chosen once so
that the sweep over (l1, l2, theta2_max) reproduces the factory link lengths;
all of them live in the config and can be overridden.

Constraint set evaluated by the optimizer:
  (1) theta1_max <= 65 deg (the link-1 sweep envelope),
  (2) every sampled cooperative-zone point is reachable within the joint box,
  (3) link 2 and the end-effector stay out of the human zone for every
      configuration in the joint box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kinematics import PlanarPose, forward_kinematics

DEG = math.pi / 180.0

THETA1_ENVELOPE_DEG = 65.0   # link-1 sweep bound imposed by the seated user


@dataclass(frozen=True)
class AnnularSector:
    """r in [r_lo, r_hi] mm, bearing psi in [psi_lo, psi_hi] rad
    (psi measured from +y toward -x)."""

    r_lo: float
    r_hi: float
    psi_lo: float
    psi_hi: float

    def __post_init__(self):
        if self.r_lo > self.r_hi or self.psi_lo > self.psi_hi:
            raise ValueError("degenerate sector bounds")

    @property
    def empty(self) -> bool:
        return self.r_lo == self.r_hi or self.psi_lo == self.psi_hi

    def contains(self, x, y, pad: float = 0.0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = np.hypot(x, y)
        psi = np.arctan2(-x, y)
        return ((r >= self.r_lo - pad) & (r <= self.r_hi + pad)
                & (psi >= self.psi_lo - 1e-12) & (psi <= self.psi_hi + 1e-12))

    def sample_grid(self, r_step: float = 5.0, psi_step: float = 1.0 * DEG):
        """Inclusive polar grid covering the sector (corners always present).

        Returns (r, psi) arrays of equal length.
        """
        if self.empty:
            return np.empty(0), np.empty(0)
        nr = max(2, int(math.ceil((self.r_hi - self.r_lo) / r_step)) + 1)
        npsi = max(2, int(math.ceil((self.psi_hi - self.psi_lo) / psi_step)) + 1)
        r = np.linspace(self.r_lo, self.r_hi, nr)
        psi = np.linspace(self.psi_lo, self.psi_hi, npsi)
        R, P = np.meshgrid(r, psi)
        return R.ravel(), P.ravel()

    def corners(self):
        return [(self.r_lo, self.psi_lo), (self.r_lo, self.psi_hi),
                (self.r_hi, self.psi_lo), (self.r_hi, self.psi_hi)]

    def project(self, pose: PlanarPose) -> PlanarPose:
        """Euclidean projection onto the (closed) sector."""
        if self.empty:
            raise ValueError("cannot project onto an empty sector")
        r = math.hypot(pose.x, pose.y)
        psi = math.atan2(-pose.x, pose.y)
        if self.psi_lo <= psi <= self.psi_hi and self.r_lo <= r <= self.r_hi:
            return pose
        candidates = []
        # clamped-polar point (nearest point when the bearing is in range,
        # and a good seed otherwise)
        psi_c = min(max(psi, self.psi_lo), self.psi_hi)
        r_c = min(max(r, self.r_lo), self.r_hi)
        candidates.append((r_c, psi_c))
        # projections onto the two straight edges
        p = np.array([pose.x, pose.y])
        for edge_psi in (self.psi_lo, self.psi_hi):
            d = np.array([-math.sin(edge_psi), math.cos(edge_psi)])
            s = min(max(float(p @ d), self.r_lo), self.r_hi)
            candidates.append((s, edge_psi))
        best, best_d = None, math.inf
        for rr, pp in candidates:
            q = PlanarPose(x=-rr * math.sin(pp), y=rr * math.cos(pp))
            dd = q.distance_to(pose)
            if dd < best_d:
                best, best_d = q, dd
        return best


@dataclass(frozen=True)
class WorkspaceSpec:
    """Anthropometric scene constants (mm) and the derived regions."""

    A: float = 327.0     # minimum horizontal reach of the smallest user
    B: float = 240.0     # harness / actuator offset between chest and base
    C: float = 150.0     # reach range small-to-large user
    D: float = 589.0     # workspace breadth (kept for reference/plots)
    E: float = 280.0     # chest depth of the largest user
    # calibrated scene constants (see module docstring)
    reach_margin: float = 7.5          # fold-clearance push-out of the band, mm
    psi_span: float = 45.5 * DEG       # angular half-breadth of the main zone
    body_radius: float = 551.0         # lean-over radius of the human zone, mm
    body_psi: tuple[float, float] = (0.5 * DEG, 40.0 * DEG)

    def __post_init__(self):
        for name in ("A", "B", "C", "D", "E"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def main_region(self) -> AnnularSector:
        lo = self.A + self.B + self.reach_margin
        return AnnularSector(lo, lo + self.C, -self.psi_span, self.psi_span)

    @property
    def cooperative_region(self) -> AnnularSector:
        m = self.main_region
        return AnnularSector(m.r_lo, m.r_hi, 0.0, m.psi_hi)

    @property
    def human_region(self) -> AnnularSector:
        return AnnularSector(0.0, self.body_radius, *self.body_psi)


@dataclass(frozen=True)
class SweepGrid:
    """Decision-variable grid of the brute-force sweep (mm / deg)."""

    l1: np.ndarray
    l2: np.ndarray
    theta1_max_deg: np.ndarray
    theta2_max_deg: np.ndarray

    @staticmethod
    def default() -> "SweepGrid":
        return SweepGrid(
            l1=np.arange(500.0, 800.0 + 1e-9, 2.0),
            l2=np.arange(400.0, 700.0 + 1e-9, 2.0),
            theta1_max_deg=np.array([65.0]),
            theta2_max_deg=np.arange(90.0, 140.0 + 1e-9, 5.0),
        )


@dataclass(frozen=True)
class WorkspaceResult:
    l1: float                   # mm
    l2: float                   # mm
    theta1_max: float           # deg
    theta2_max: float           # deg
    area_W: float               # reachable area, mm^2
    feasible: dict = field(default_factory=dict)   # per-constraint booleans


class InfeasibleGridError(ValueError):
    """No candidate on the sweep grid satisfies all constraints."""


# ---------------------------------------------------------------------------
# geometric primitives of the feasibility test
# ---------------------------------------------------------------------------

def _fold_elbow_offset(l1, l2, theta2):
    """Angle between link 1 and the base->EE ray (the elbow 'fold-back')."""
    return np.arctan2(l2 * np.sin(theta2), l1 + l2 * np.cos(theta2))


def _theta2_for_radius(l1, l2, r):
    """Fold angle placing the EE at radius r; NaN when out of the annulus."""
    c = (r * r - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)
    with np.errstate(invalid="ignore"):
        return np.where(np.abs(c) <= 1.0, np.arccos(np.clip(c, -1.0, 1.0)), np.nan)


def min_link2_window_distance(l1, l2, theta2, psi_window) -> np.ndarray:
    """Minimum distance from the base to link-2 points whose bearing (at
    theta1 = 0) can rotate into ``psi_window`` for some theta1 in the sweep.

    Because rotating by theta1 in [0, theta1_max] only moves bearings toward
    -theta1, a chord point at bearing psi0 >= psi_lo is the relevant set; the
    minimum over that set is attained at the perpendicular foot (when its
    bearing is inside the window and its parameter inside the segment), at
    the EE endpoint, or at the window-edge crossings.  All closed-form.
    Arrays broadcast over candidates x theta2.
    """
    l1 = np.asarray(l1, dtype=float)
    l2 = np.asarray(l2, dtype=float)
    t2 = np.asarray(theta2, dtype=float)
    psi_lo, psi_hi = psi_window

    best = np.full(np.broadcast(l1, l2, t2).shape, np.inf)

    # perpendicular foot: distance l1 sin(theta2), bearing theta2 - 90 deg,
    # inside the segment for theta2 >= 90 deg (u* = -l1 cos(theta2)/l2 in [0,1])
    u_star = -l1 * np.cos(t2) / l2
    foot_psi = t2 - 0.5 * math.pi
    foot_ok = (u_star >= 0.0) & (u_star <= 1.0) & (foot_psi >= psi_lo) & (foot_psi <= psi_hi)
    best = np.where(foot_ok, np.minimum(best, l1 * np.sin(t2)), best)

    # EE endpoint: radius r(theta2), bearing off(theta2)
    r_ee = np.sqrt(l1 ** 2 + l2 ** 2 + 2.0 * l1 * l2 * np.cos(t2))
    psi_ee = _fold_elbow_offset(l1, l2, t2)
    ee_ok = (psi_ee >= psi_lo) & (psi_ee <= psi_hi)
    best = np.where(ee_ok, np.minimum(best, r_ee), best)

    # crossings of the chord with the window edge rays
    ex = np.zeros_like(best)
    ey = l1 * np.ones_like(best)
    dx = -l2 * np.sin(t2)
    dy = l2 * np.cos(t2)
    for edge in (psi_lo, psi_hi):
        rx, ry = -math.sin(edge), math.cos(edge)
        # solve E + u (dx, dy) = s (rx, ry)
        det = dx * ry - dy * rx
        safe = np.abs(det) > 1e-12
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.where(safe, (ey * rx - ex * ry) / det, np.nan)
            s = np.where(safe, (dx * ey - dy * ex) / det, np.nan)
        ok = safe & (u >= 0.0) & (u <= 1.0) & (s >= 0.0)
        best = np.where(ok, np.minimum(best, s), best)
    return best


def _coverage_ok(l1, l2, th1max, th2max, r_s, psi_s) -> np.ndarray:
    """Vectorized: can (l1, l2) reach every sample (r_s, psi_s) within the
    joint box?  Candidate axes broadcast against a trailing sample axis."""
    l1 = np.asarray(l1, dtype=float)[..., None]
    l2 = np.asarray(l2, dtype=float)[..., None]
    t2 = _theta2_for_radius(l1, l2, r_s)
    off = _fold_elbow_offset(l1, l2, t2)
    th1 = off - psi_s
    ok = (~np.isnan(t2)) & (t2 <= th2max + 1e-9) \
        & (th1 >= -1e-9) & (th1 <= th1max + 1e-9)
    return np.all(ok, axis=-1)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def reachable_workspace(l1: float, l2: float, limits_deg, grid_step_deg: float = 1.0):
    """End-effector positions over the joint-limit box, sampled at
    grid_step_deg.  Returns an (N, 2) array in mm."""
    if grid_step_deg <= 0:
        raise ValueError("grid_step must be positive")
    (lo1, hi1), (lo2, hi2) = limits_deg
    n1 = max(1, int(round((hi1 - lo1) / grid_step_deg)) + 1)
    n2 = max(1, int(round((hi2 - lo2) / grid_step_deg)) + 1)
    t1 = np.linspace(lo1, hi1, n1) * DEG
    t2 = np.linspace(lo2, hi2, n2) * DEG
    T1, T2 = np.meshgrid(t1, t2)
    q12 = T1 - T2
    x = l1 * np.sin(T1) + l2 * np.sin(q12)
    y = l1 * np.cos(T1) + l2 * np.cos(q12)
    return np.column_stack([x.ravel(), y.ravel()])


def raster_area(points: np.ndarray, cell: float = 5.0) -> float:
    """Occupancy area of a point cloud on a square raster, mm^2."""
    if len(points) == 0:
        return 0.0
    cells = np.unique(np.floor(points / cell).astype(np.int64), axis=0)
    return float(len(cells)) * cell * cell


def check_constraints(l1: float, l2: float, limits_deg, spec: WorkspaceSpec,
                      r_step: float = 5.0, psi_step: float = 1.0 * DEG) -> dict:
    """Evaluate the three design constraints for one candidate.

    limits_deg: ((0, theta1_max), (0, theta2_max)) in degrees.
    """
    th1max = limits_deg[0][1] * DEG
    th2max = limits_deg[1][1] * DEG

    c1 = limits_deg[0][1] <= THETA1_ENVELOPE_DEG + 1e-9

    coop = spec.cooperative_region
    if coop.empty:
        c2 = True
    else:
        r_s, psi_s = coop.sample_grid(r_step, psi_step)
        c2 = bool(_coverage_ok(np.array([l1]), np.array([l2]),
                               th1max, th2max, r_s, psi_s)[0])

    human = spec.human_region
    if human.empty:
        c3 = True
    else:
        t2_grid = np.arange(0.0, th2max + 1e-9, 0.5 * DEG)
        dmin = min_link2_window_distance(l1, l2, t2_grid, (human.psi_lo, human.psi_hi))
        c3 = bool(np.min(dmin) >= human.r_hi - 1e-9)
    return {"link1_envelope": c1, "cooperative_covered": c2, "human_zone_clear": c3}


def optimize_workspace(spec: WorkspaceSpec, grid: SweepGrid | None = None,
                       r_step: float = 5.0, psi_step: float = 1.0 * DEG,
                       area_step_deg: float = 1.0) -> WorkspaceResult:
    """Exhaustive sweep of the grid; returns the feasible candidate with the
    smallest l1 + l2 (ties: smaller l1, then smaller theta2_max).

    Raises InfeasibleGridError when nothing on the grid is feasible.
    """
    grid = grid or SweepGrid.default()
    if any(len(a) == 0 for a in (grid.l1, grid.l2, grid.theta1_max_deg,
                                 grid.theta2_max_deg)):
        raise InfeasibleGridError("empty sweep grid")

    coop = spec.cooperative_region
    human = spec.human_region
    if not coop.empty:
        r_corners = np.array([c[0] for c in coop.corners()])
        psi_corners = np.array([c[1] for c in coop.corners()])
        r_all, psi_all = coop.sample_grid(r_step, psi_step)

    L1, L2 = np.meshgrid(grid.l1, grid.l2, indexing="ij")
    l1f = L1.ravel()
    l2f = L2.ravel()

    best = None   # (s, l1, th2max_deg, th1max_deg, l2)
    for th1max_deg in grid.theta1_max_deg:
        if th1max_deg > THETA1_ENVELOPE_DEG + 1e-9:
            continue   # constraint (1)
        th1max = th1max_deg * DEG
        for th2max_deg in np.sort(grid.theta2_max_deg):
            th2max = th2max_deg * DEG

            feas = np.ones(l1f.shape, dtype=bool)
            if not human.empty:
                t2_grid = np.arange(0.0, th2max + 1e-9, 2.5 * DEG)
                if t2_grid[-1] < th2max - 1e-9:
                    t2_grid = np.append(t2_grid, th2max)
                d = min_link2_window_distance(
                    l1f[:, None], l2f[:, None], t2_grid[None, :],
                    (human.psi_lo, human.psi_hi))
                feas &= np.min(d, axis=1) >= human.r_hi - 1e-9
            if not coop.empty and feas.any():
                idx = np.nonzero(feas)[0]
                # cheap necessary test on the corners, then the full grid
                ok = _coverage_ok(l1f[idx], l2f[idx], th1max, th2max,
                                  r_corners, psi_corners)
                idx = idx[ok]
                keep = np.zeros(l1f.shape, dtype=bool)
                chunk = 4000
                for start in range(0, len(idx), chunk):
                    sl = idx[start:start + chunk]
                    keep[sl] = _coverage_ok(l1f[sl], l2f[sl], th1max, th2max,
                                            r_all, psi_all)
                feas &= keep

            if not feas.any():
                continue
            s = l1f[feas] + l2f[feas]
            l1c = l1f[feas]
            l2c = l2f[feas]
            order = np.lexsort((l1c, s))
            cand = (float(s[order[0]]), float(l1c[order[0]]),
                    float(th2max_deg), float(th1max_deg), float(l2c[order[0]]))
            # strict lexicographic improvement keeps the smallest theta2_max
            if best is None or (cand[0], cand[1], cand[2]) < (best[0], best[1], best[2]):
                best = cand

    if best is None:
        raise InfeasibleGridError("no feasible candidate on the sweep grid")

    s, l1b, th2b, th1b, l2b = best
    limits = ((0.0, th1b), (0.0, th2b))
    pts = reachable_workspace(l1b, l2b, limits, area_step_deg)
    return WorkspaceResult(
        l1=l1b, l2=l2b, theta1_max=th1b, theta2_max=th2b,
        area_W=raster_area(pts),
        feasible=check_constraints(l1b, l2b, limits, spec, r_step, psi_step),
    )
