"""Workspace geometry, constraints, and the brute-force sweep."""

import math

import numpy as np
import pytest

from vsarm.kinematics import PlanarPose
from vsarm.workspace import (AnnularSector, InfeasibleGridError, SweepGrid,
                             WorkspaceSpec, check_constraints,
                             optimize_workspace, raster_area,
                             reachable_workspace)

DEG = math.pi / 180.0
FACTORY = (674.0, 545.0)
FACTORY_LIMITS = ((0.0, 65.0), (0.0, 125.0))


@pytest.fixture(scope="module")
def spec():
    return WorkspaceSpec()


# -- regions -----------------------------------------------------------------

def test_default_spec_keeps_the_anthropometric_values(spec):
    assert (spec.A, spec.B, spec.C, spec.D, spec.E) == (327, 240, 150, 589, 280)
    assert spec.cooperative_region.r_lo == pytest.approx(spec.A + spec.B
                                                         + spec.reach_margin)
    assert spec.cooperative_region.r_hi - spec.cooperative_region.r_lo \
        == pytest.approx(spec.C)


def test_cooperative_is_half_of_main(spec):
    coop, main = spec.cooperative_region, spec.main_region
    assert coop.psi_lo == pytest.approx(0.0)
    assert coop.psi_hi == pytest.approx(main.psi_hi)
    assert main.psi_lo == pytest.approx(-main.psi_hi)


def test_human_zone_disjoint_from_cooperative(spec):
    r, psi = spec.cooperative_region.sample_grid()
    x, y = -r * np.sin(psi), r * np.cos(psi)
    assert not spec.human_region.contains(x, y).any()


def test_sector_projection_matches_exhaustive_search(spec):
    coop = spec.cooperative_region
    rng = np.random.default_rng(7)
    # dense grid of region cells as the brute-force oracle
    r, psi = coop.sample_grid(1.0, 0.1 * DEG)
    gx, gy = -r * np.sin(psi), r * np.cos(psi)
    for _ in range(25):
        p = PlanarPose(float(rng.uniform(-900, 900)), float(rng.uniform(-100, 1100)))
        q = coop.project(p)
        assert coop.contains(q.x, q.y, pad=1e-6)
        brute = np.min(np.hypot(gx - p.x, gy - p.y))
        assert q.distance_to(p) <= brute + 1e-3


def test_projection_identity_inside(spec):
    p = PlanarPose(-23.62, 650.69)
    q = spec.cooperative_region.project(p)
    assert (q.x, q.y) == (p.x, p.y)


def test_projection_out_of_human_zone(spec):
    inside_h = PlanarPose(-200.0, 300.0)
    assert spec.human_region.contains(inside_h.x, inside_h.y)
    q = spec.cooperative_region.project(inside_h)
    assert spec.cooperative_region.contains(q.x, q.y, pad=1e-6)
    assert not spec.human_region.contains(q.x, q.y)


# -- reachable workspace -----------------------------------------------------

def test_zero_joint_ranges_give_a_single_point():
    pts = reachable_workspace(*FACTORY, ((10.0, 10.0), (20.0, 20.0)), 1.0)
    assert pts.shape == (1, 2)


def test_factory_workspace_contains_the_cooperative_region(spec):
    pts = reachable_workspace(*FACTORY, FACTORY_LIMITS, 0.5)
    r, psi = spec.cooperative_region.sample_grid(5.0, 1.0 * DEG)
    cx, cy = -r * np.sin(psi), r * np.cos(psi)
    # every cooperative sample has a reachable point within the raster cell
    for x, y in zip(cx, cy):
        assert np.min(np.hypot(pts[:, 0] - x, pts[:, 1] - y)) < 6.0


def test_shrinking_the_elbow_range_shrinks_the_region():
    big = raster_area(reachable_workspace(*FACTORY, FACTORY_LIMITS, 1.0))
    small = raster_area(reachable_workspace(
        *FACTORY, ((0.0, 65.0), (0.0, 90.0)), 1.0))
    assert small < big


def test_area_monotone_in_length_and_limits():
    base = raster_area(reachable_workspace(600, 500, FACTORY_LIMITS, 1.0))
    longer = raster_area(reachable_workspace(650, 540, FACTORY_LIMITS, 1.0))
    wider = raster_area(reachable_workspace(
        600, 500, ((0.0, 65.0), (0.0, 140.0)), 1.0))
    assert longer >= base
    assert wider >= base


# -- constraints -------------------------------------------------------------

def test_factory_point_satisfies_all_constraints(spec):
    flags = check_constraints(*FACTORY, FACTORY_LIMITS, spec)
    assert all(flags.values())


def test_link1_envelope_violated_at_80_deg(spec):
    flags = check_constraints(*FACTORY, ((0.0, 80.0), (0.0, 125.0)), spec)
    assert not flags["link1_envelope"]


def test_short_links_cannot_cover_the_cooperative_zone(spec):
    flags = check_constraints(100.0, 100.0, FACTORY_LIMITS, spec)
    assert not flags["cooperative_covered"]


# -- the sweep ---------------------------------------------------------------

def test_optimizer_reproduces_the_factory_design(spec):
    res = optimize_workspace(spec, SweepGrid.default())
    assert abs(res.l1 - 674.0) <= 15.0
    assert abs(res.l2 - 545.0) <= 15.0
    assert res.theta1_max == pytest.approx(65.0)
    assert abs(res.theta2_max - 125.0) <= 5.0
    assert all(res.feasible.values())
    assert res.area_W > 0


def test_optimum_is_grid_minimal_on_a_coarse_rescan(spec):
    """Independent re-scan: no feasible coarse-grid candidate has a strictly
    smaller l1 + l2 than the sweep's winner."""
    grid = SweepGrid(l1=np.arange(520.0, 800.0 + 1e-9, 10.0),
                     l2=np.arange(420.0, 700.0 + 1e-9, 10.0),
                     theta1_max_deg=np.array([65.0]),
                     theta2_max_deg=np.arange(90.0, 140.0 + 1e-9, 5.0))
    res = optimize_workspace(spec, grid)
    best = res.l1 + res.l2
    for l1 in grid.l1:
        for l2 in grid.l2:
            if l1 + l2 >= best:
                continue
            for th2 in grid.theta2_max_deg:
                flags = check_constraints(l1, l2, ((0.0, 65.0), (0.0, th2)), spec)
                assert not all(flags.values()), (
                    f"({l1}, {l2}, {th2}) feasible but cheaper than the optimum")


def test_empty_cooperative_region_selects_the_smallest_candidate():
    spec = WorkspaceSpec(reach_margin=0.0, psi_span=0.0,   # empty sectors
                         body_radius=0.0, body_psi=(0.0, 0.0))
    grid = SweepGrid(l1=np.array([500.0, 600.0]), l2=np.array([400.0, 500.0]),
                     theta1_max_deg=np.array([65.0]),
                     theta2_max_deg=np.array([90.0, 125.0]))
    res = optimize_workspace(spec, grid)
    assert (res.l1, res.l2) == (500.0, 400.0)
    assert res.theta2_max == 90.0   # tie-break prefers the smaller elbow range


def test_unreachable_cooperative_zone_is_infeasible():
    spec = WorkspaceSpec(reach_margin=1000.0)   # pushed beyond max grid reach
    grid = SweepGrid(l1=np.array([500.0]), l2=np.array([400.0]),
                     theta1_max_deg=np.array([65.0]),
                     theta2_max_deg=np.array([125.0]))
    with pytest.raises(InfeasibleGridError):
        optimize_workspace(spec, grid)
