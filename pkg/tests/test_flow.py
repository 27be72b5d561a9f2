"""Branch bookkeeping, beta functions and flow integration."""
import math

import numpy as np
import pytest

from jcflow import (
    BranchIndex,
    FlowState,
    arcsin_branch,
    beta_exact,
    beta_one_loop,
    c_function,
    flow_integrate,
    flow_integrate_one_loop,
    logistic_interpolation_check,
    perturbative_bare_coupling,
    renormalised_coupling_branches,
    spectrum,
)


def test_arcsin_branch_basics():
    assert abs(arcsin_branch(0, 0.5) - math.pi / 6) < 1e-15
    assert abs(arcsin_branch(1, 0.5) - 2.617993877991494) < 1e-15
    assert abs(arcsin_branch(2, 0.5) - 6.806784082777885) < 1e-15
    rng = np.random.default_rng(3)
    x = rng.uniform(-1.0, 1.0, 200)
    for n in range(6):
        th = arcsin_branch(n, x)
        assert np.abs(np.sin(th) - x).max() < 2e-15
        # branch n lives in ((n-1/2)pi, (n+1/2)pi)
        assert np.all(th > (n - 0.5) * math.pi - 1e-12)
        assert np.all(th < (n + 0.5) * math.pi + 1e-12)
    with pytest.raises(ValueError):
        arcsin_branch(0, 1.5)
    with pytest.raises(ValueError):
        arcsin_branch(-1, 0.5)


def test_branch_index_labels():
    assert BranchIndex(1, -1).label == "(1,-)"
    assert BranchIndex(0, 1).label == "(0,+)"
    with pytest.raises(ValueError):
        BranchIndex(-1, 1)
    with pytest.raises(ValueError):
        BranchIndex(0, 0)
    with pytest.raises(ValueError):
        FlowState(0.0, 0.5, -1)


def test_branches_at_p01():
    out = renormalised_coupling_branches(0.1, 4)
    assert len(out) == 9  # (0,-) lands at negative coupling and is gauged away
    g0s = [g for _, g in out]
    assert g0s == sorted(g0s)
    for _, g0 in out:
        assert abs(math.sin(g0) ** 2 - 0.1) < 1e-12
    by_label = {b.label: g for b, g in out}
    assert abs(by_label["(0,+)"] - 0.3217505543966422) < 1e-15
    assert abs(by_label["(1,+)"] - 2.819842099193151) < 1e-15
    assert abs(by_label["(1,-)"] - 3.4633432079864352) < 1e-15


def test_branches_collapse_at_endpoints():
    # p = 1 merges the sign pairs, p = 0 merges each branch with a neighbour
    out1 = renormalised_coupling_branches(1.0, 3)
    assert [g for _, g in out1] == pytest.approx(
        [(n + 0.5) * math.pi for n in range(4)], abs=1e-12)
    out0 = renormalised_coupling_branches(0.0, 3)
    assert [g for _, g in out0] == pytest.approx(
        [n * math.pi for n in range(4)], abs=1e-12)


def test_spectrum_frozen():
    tab = spectrum(BranchIndex(0, 1), 0.1, 4)
    assert tab.probabilities[0] == pytest.approx(0.1, abs=1e-15)
    assert abs(tab.probabilities[1] - 0.19314607190566427) < 1e-15
    # the j = 3 entry reflects P0 through sin^2(2x) = 4 p (1-p)
    assert tab.probabilities[3] == 0.36
    with pytest.raises(ValueError):
        spectrum(BranchIndex(0, -1), 0.1, 4)  # negative coupling on that branch
    with pytest.raises(ValueError):
        spectrum(BranchIndex(0, 1), 1.5, 4)


def test_perturbative_inversion():
    assert perturbative_bare_coupling(0.3, order=1) == 0.3
    assert perturbative_bare_coupling(0.5) == 0.5208333333333334
    assert perturbative_bare_coupling(0.1) == 0.10016666666666667
    # cubic term halves the residual order: sin(g0(gr)) - gr = O(gr^5)
    for gr in (0.05, 0.1, 0.2):
        res = math.sin(perturbative_bare_coupling(gr)) - gr
        assert abs(res) < gr**5
    with pytest.raises(ValueError):
        perturbative_bare_coupling(1.0)
    with pytest.raises(ValueError):
        perturbative_bare_coupling(0.5, order=2)


def test_beta_functions():
    assert beta_one_loop(0.0) == 0.0
    assert abs(beta_one_loop(math.sqrt(3.0))) < 1e-15
    assert beta_exact(1.0, 0) == 0.0
    assert beta_exact(-1.0, 3) == 0.0
    assert abs(beta_exact(0.5, 0) - math.sqrt(0.75) * math.pi / 6) < 1e-15
    assert abs(beta_exact(0.5, 2) - 5.894847933761207) < 1e-14
    # branches alternate sign away from the turning points
    assert beta_exact(0.5, 1) < 0.0 < beta_exact(0.5, 2)
    # small-coupling agreement with the cubic truncation, residual -2/15 g^5
    g = np.linspace(-0.3, 0.3, 31)
    assert np.abs(beta_exact(g, 0) - beta_one_loop(g)).max() < 3.5e-4
    with pytest.raises(ValueError):
        beta_exact(1.0 + 1e-9, 0)


def test_flow_matches_closed_form():
    g0 = math.pi / 6 + 2.0 * math.pi
    states = flow_integrate(g0, (-2.0, 1.5), n_samples=501)
    t = np.array([s.t for s in states])
    g = np.array([s.g_r for s in states])
    assert np.abs(g - np.sin(g0 * np.exp(t))).max() < 1e-6
    assert states[-1].branch_count - states[0].branch_count == 10
    # injected turning states carry |g| = 1 exactly
    turn = [s for s in states if abs(s.g_r) == 1.0]
    assert len(turn) == 10
    assert all(abs(math.sin(g0 * math.exp(s.t))) > 1.0 - 1e-15 for s in turn)


def test_flow_starting_inside_band():
    # theta(t0) = pi/2 up to rounding: the run opens at a turning point
    g0 = 0.5 * math.pi
    states = flow_integrate(g0, (0.0, 1.0), n_samples=201)
    t = np.array([s.t for s in states])
    g = np.array([s.g_r for s in states])
    assert np.abs(g - np.sin(g0 * np.exp(t))).max() < 1e-6


def test_flow_zero_coupling():
    states = flow_integrate(0.0, (-1.0, 1.0), n_samples=11)
    assert len(states) == 11
    assert all(s.g_r == 0.0 and s.branch_count == 0 for s in states)


def test_flow_validation():
    with pytest.raises(ValueError):
        flow_integrate(-0.5, (0.0, 1.0))
    with pytest.raises(ValueError):
        flow_integrate(0.5, (1.0, 0.0))
    with pytest.raises(ValueError):
        flow_integrate(0.5, (0.0, 1.0), switch_band=0.5)


def test_one_loop_saturates():
    states = flow_integrate_one_loop(0.1, (0.0, 12.0), n_samples=601)
    g = np.array([s.g_r for s in states])
    assert np.all(np.diff(g) > 0.0)
    assert abs(g[-1] - math.sqrt(3.0)) < 1e-4
    assert all(s.branch_count == 0 for s in states)


def test_c_function_properties():
    g0 = math.pi / 6 + 2.0 * math.pi
    states = flow_integrate(g0, (-2.0, 1.5), n_samples=501)
    c = c_function(states)
    assert c[0] == 0.0
    assert np.all(np.diff(c) >= 0.0)
    flat = c_function(flow_integrate(0.0, (0.0, 1.0), n_samples=11))
    assert np.all(flat == 0.0)
    with pytest.raises(ValueError):
        c_function(states[:1])
    with pytest.raises(ValueError):
        c_function(list(reversed(states)))


def test_logistic_identity_seeded():
    rng = np.random.default_rng(17)
    for _ in range(50):
        g0 = rng.uniform(0.0, 2.0 * math.pi)
        t = rng.uniform(-2.0, 2.0, 20)
        x_now, x_doubled, image = logistic_interpolation_check(g0, t)
        assert np.abs(x_doubled - image).max() < 1e-12
    x0, x1, im = logistic_interpolation_check(0.7, 0.0)
    assert isinstance(x0, float)
    assert abs(x1 - im) < 1e-15
