"""Soft-tissue contact model and the stab scenarios."""

import math

import numpy as np
import pytest

from vsarm import dynamics as dyn
from vsarm.contact import (CASE_SETUP, ContactMedium, ReactionStrategy,
                           StabSetup, apply_reaction, contact_force,
                           run_stab_scenario, sweep)
from vsarm.params import default_params


@pytest.fixture(scope="module")
def medium():
    return ContactMedium()


# -- contact force -------------------------------------------------------------

def test_no_force_outside_the_medium(medium):
    assert contact_force(medium, medium.surface_s - 0.01, 0.5) == 0.0
    assert contact_force(medium, -1.0, -2.0) == 0.0


def test_static_indentation_is_hookean():
    med = ContactMedium(k_c=5000.0, c_c=50.0, F_y=31.0)
    f = contact_force(med, med.surface_s + 0.001, 0.0)
    assert f == pytest.approx(5.0)
    assert f < med.F_y    # elastic indentation, no cutting


def test_force_never_adhesive(medium):
    # retracting fast inside the layer: damping cannot pull
    f = contact_force(medium, medium.surface_s + 0.001, -10.0)
    assert f == 0.0


def test_impact_matches_1d_mass_spring_damper_oracle(medium):
    """A point mass driven into the layer: the package force evaluated on an
    independently integrated 1-D trajectory must match the oracle's own
    Kelvin-Voigt force at every sample."""
    m, v0 = 2.0, 0.4
    dt = 1e-5
    s = medium.surface_s - 0.001
    v = v0
    for _ in range(4000):
        depth = s - medium.surface_s
        f_oracle = max(0.0, medium.k_c * depth + medium.c_c * v) if depth > 0 else 0.0
        assert contact_force(medium, s, v) == pytest.approx(f_oracle, abs=1e-12)
        a = -f_oracle / m
        v += a * dt
        s += v * dt
    # quasi-analytic sanity: peak force of the undamped impact is
    # v0 sqrt(k m); damping adds at most c v0
    peak = v0 * math.sqrt(medium.k_c * m) + medium.c_c * v0
    assert contact_force(medium, medium.surface_s + v0 / math.sqrt(medium.k_c / m),
                         0.0) <= peak


# -- reactions -------------------------------------------------------------------

def test_zero_torque_keeps_the_stiffness_level():
    p = default_params()
    s = dyn.rest_state(p, [0.5, 1.0], k=[8000.0, 8000.0])
    tau, s2 = apply_reaction(ReactionStrategy.ZERO_TORQUE, p, s)
    assert tau == pytest.approx(np.zeros(2))
    assert s2.k_target == pytest.approx(np.array([8000.0, 8000.0]))


def test_soften_commands_minimum_stiffness_with_the_ramp():
    p = default_params()
    s = dyn.rest_state(p, [0.5, 1.0], k=[8000.0, 8000.0])
    tau, s2 = apply_reaction(ReactionStrategy.ZERO_TORQUE_SOFTEN, p, s)
    assert tau == pytest.approx(np.zeros(2))
    assert s2.k_target == pytest.approx(np.array([p.k_min, p.k_min]))
    # the ramp needs the full variation time, far longer than a collision
    n = 0
    while s2.k[0] > p.k_min + 1e-9:
        s2, _, _ = dyn.step(p, s2, np.zeros(2), np.zeros(2), 1e-3)
        n += 1
    assert abs(n * 1e-3 - p.t_stiff) <= 2e-3


def test_reaction_at_rest_stays_at_rest():
    p = default_params()
    s = dyn.rest_state(p, [0.5, 1.0], k=[8000.0, 8000.0])
    tau, s2 = apply_reaction(ReactionStrategy.ZERO_TORQUE, p, s)
    for _ in range(500):
        s2, _, _ = dyn.step(p, s2, tau, np.zeros(2), 1e-3)
    assert s2.theta_dot == pytest.approx(np.zeros(2), abs=1e-9)
    assert s2.theta == pytest.approx(np.array([0.5, 1.0]), abs=1e-9)


# -- stab scenarios ---------------------------------------------------------------

def test_case_table_matches_the_three_strategies():
    assert CASE_SETUP[1] == ("low", ReactionStrategy.ZERO_TORQUE)
    assert CASE_SETUP[2] == ("high", ReactionStrategy.ZERO_TORQUE)
    assert CASE_SETUP[3] == ("high", ReactionStrategy.ZERO_TORQUE_SOFTEN)


def test_unknown_case_and_bad_velocity_rejected(medium):
    p = default_params()
    with pytest.raises(ValueError):
        run_stab_scenario(4, 0.3, p, medium)
    with pytest.raises(ValueError):
        run_stab_scenario(1, 0.0, p, medium)


def test_case1_at_the_rated_speed_never_cuts(medium):
    res = run_stab_scenario(1, 0.48, default_params(), medium)
    assert res.d_p == 0.0
    assert res.F_p < medium.F_y
    assert res.detected_at is not None


def test_vanishing_speed_is_quasi_static_for_all_cases(medium):
    p = default_params()
    for case in (1, 2, 3):
        res = run_stab_scenario(case, 0.02, p, medium)
        assert res.d_p == 0.0


def test_zero_torque_holds_after_detection(medium):
    p = default_params()
    res, trace = run_stab_scenario(2, 0.4, p, medium, log_arrays=True)
    assert res.detected_at is not None
    t = np.asarray(trace["t"])
    tau = np.abs(np.array([trace["tau1"], trace["tau2"]]))
    after = t > res.detected_at
    assert np.max(tau[:, after]) == 0.0


def test_soften_case_ramps_the_stiffness_down(medium):
    p = default_params()
    res, trace = run_stab_scenario(3, 0.4, p, medium, log_arrays=True)
    t = np.asarray(trace["t"])
    k1 = np.asarray(trace["k1"])
    after = t >= res.detected_at
    k_after = k1[after]
    # at most one ramp step elapsed by the first logged post-detection sample
    assert k_after[0] >= p.k_max - 1.5 * p.stiffness_rate * 1e-3
    assert k_after[-1] == pytest.approx(p.k_min)
    assert np.all(np.diff(k_after) <= 1e-9)   # monotone ramp
    rate = np.max(-np.diff(k_after)) / 1e-3
    assert rate <= p.stiffness_rate * (1 + 1e-9)


def test_detection_precedes_the_force_peak(medium):
    p = default_params()
    for case in (1, 2, 3):
        res = run_stab_scenario(case, 0.48, p, medium)
        assert res.detected_at is not None
        assert res.detected_at <= res.peak_force_at


def test_case_ordering_and_monotonicity_on_a_small_sweep(medium):
    p = default_params()
    results = sweep([0.3, 0.6], [1, 2, 3], p, medium)
    by = {(r.case_id, r.velocity): r for r in results}
    for v in (0.3, 0.6):
        assert by[(2, v)].d_p >= by[(3, v)].d_p >= by[(1, v)].d_p
        assert by[(2, v)].F_p >= by[(1, v)].F_p


def test_stiffer_medium_does_not_reduce_the_peak_force(medium):
    p = default_params()
    soft = run_stab_scenario(2, 0.4, p, medium)
    hard = run_stab_scenario(2, 0.4, p,
                             ContactMedium(k_c=2.0 * medium.k_c, c_c=medium.c_c,
                                           F_y=medium.F_y,
                                           depth_limit=medium.depth_limit))
    assert hard.F_p >= soft.F_p


def test_sweep_rejects_empty_inputs(medium):
    with pytest.raises(ValueError):
        sweep([], [1], default_params(), medium)
    with pytest.raises(ValueError):
        sweep([0.3], [], default_params(), medium)


def test_single_cell_sweep(medium):
    rows = sweep([0.3], [2], default_params(), medium)
    assert len(rows) == 1
    assert rows[0].case_id == 2 and rows[0].velocity == 0.3
