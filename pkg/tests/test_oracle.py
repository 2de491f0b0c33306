import numpy as np
import pytest
from hypothesis import given, strategies as st

from cdepbounds import DiscretizedProblem, TruncatedGaussian, Uniform, lp_cdf_extremum, lp_mean_extremum, uniform_problem
from cdepbounds.cdep import CdepContext, generic_cdf_bounds
from cdepbounds.oracle import greedy_box_budget, lp_binary_extremum, outcome_problem, verify_suite
from cdepbounds.potential import binary_prob_bounds
from cdepbounds.distributions import CovariateCell
from cdepbounds.effects import cond_mean_bounds

probs = st.floats(0.01, 0.99)
unit = st.floats(0.0, 1.0)


def test_cdf_hand_value():
    prob = uniform_problem(10, 0.75, 0.1)
    assert lp_cdf_extremum(prob, 0.3, "max") == pytest.approx(0.34, abs=1e-12)
    assert lp_cdf_extremum(prob, 0.3, "min") == pytest.approx(0.26, abs=1e-12)


@pytest.mark.parametrize("u", [0.0, 0.13, 0.5, 0.97])
def test_cdf_without_dependence(u):
    prob = uniform_problem(10, 0.4, 0.0)
    for d in ("min", "max"):
        assert lp_cdf_extremum(prob, u, d) == pytest.approx(u, abs=1e-12)


def test_cdf_at_top():
    assert lp_cdf_extremum(uniform_problem(7, 0.3, 0.2), 1.0, "min") == 1.0


def test_mean_hand_values():
    prob = uniform_problem(100, 0.5, 0.5)
    mids = (np.arange(100) + 0.5) / 100
    assert lp_mean_extremum(prob, mids, "max") == pytest.approx(0.75, abs=0.005)
    two = DiscretizedProblem([0.0, 0.5, 1.0], [0.5, 0.5], 0.5, 0.1)
    value, r = lp_mean_extremum(two, [0.0, 1.0], "max", return_solution=True)
    assert value == pytest.approx(0.6, abs=1e-12)
    assert r == pytest.approx([0.4, 0.6], abs=1e-12)
    flat = uniform_problem(100, 0.3, 0.0)
    assert lp_mean_extremum(flat, mids, "min") == pytest.approx(0.5, abs=1e-12)


def test_argument_errors():
    prob = uniform_problem(4, 0.5, 0.1)
    with pytest.raises(ValueError, match="values"):
        lp_mean_extremum(prob, [0.0, 1.0], "max")
    with pytest.raises(ValueError):
        lp_cdf_extremum(prob, 0.5, "up")
    with pytest.raises(ValueError):
        DiscretizedProblem([0, 1], [0.5], 0.5, 0.1)
    with pytest.raises(ValueError):
        DiscretizedProblem([0, 0.5, 1], [0.5, 0.5], 1.0, 0.1)
    with pytest.raises(ValueError, match="infeasible"):
        greedy_box_budget([1, 1], [0, 0], [1, 1], 3.0, [1, 0])


@given(probs, unit, unit, st.sampled_from(["min", "max"]), st.integers(1, 50))
def test_selection_feasible(p, c, u, d, n):
    prob = uniform_problem(n, p, c)
    _, r = lp_cdf_extremum(prob, u, d, return_selection=True)
    sp = prob.split_at(u)
    assert np.all(r >= prob.floor - 1e-12) and np.all(r <= prob.cap + 1e-12)
    masses = sp.masses if r.size == sp.n_bins else prob.masses
    assert float(np.dot(masses, r)) == pytest.approx(p, abs=1e-12)


@given(probs, unit, unit, st.integers(1, 40))
def test_within_one_bin_of_closed_form(p, c, u, n):
    prob = uniform_problem(n, p, c)
    b = generic_cdf_bounds(CdepContext(p, c), u)
    tol = 1.0 / n / p
    assert abs(lp_cdf_extremum(prob, u, "min") - b.lower) <= tol
    assert abs(lp_cdf_extremum(prob, u, "max") - b.upper) <= tol


@given(st.floats(0.05, 0.95), unit, st.floats(-1, 1), st.floats(0.3, 2))
def test_outcome_mean_close_to_closed_form(p, c, loc, scale):
    dist = TruncatedGaussian(loc, scale)
    prob, values = outcome_problem(dist, p, c, n_bins=400)
    b = cond_mean_bounds(CovariateCell("v", 1.0, p, dist, dist), 1, c)
    assert lp_mean_extremum(prob, values, "min") == pytest.approx(b.lower, abs=2e-2)
    assert lp_mean_extremum(prob, values, "max") == pytest.approx(b.upper, abs=2e-2)


def test_outcome_mean_unit_cell():
    prob, values = outcome_problem(Uniform(), 0.5, 0.6, n_bins=1000)
    assert lp_mean_extremum(prob, values, "max") == pytest.approx(0.75, abs=1e-3)
    assert lp_mean_extremum(prob, values, "min") == pytest.approx(0.25, abs=1e-3)


@given(probs, probs, unit)
def test_binary_oracle_matches_closed_form(s, p, c):
    cell = CovariateCell("v", 1.0, p, success1=s, success0=s)
    for both in (False, True):
        b = binary_prob_bounds(cell, 1, c, both_levels=both)
        assert lp_binary_extremum(s, p, c, "min", both) == pytest.approx(b.lower, abs=1e-9)
        assert lp_binary_extremum(s, p, c, "max", both) == pytest.approx(b.upper, abs=1e-9)


def test_verify_suite_small():
    out = verify_suite(n_cdf=40, n_mean=6, n_bins=400, seed=3)
    assert out["passed"]
    assert out["cdf_max_error"] < 1e-10
