import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cdepbounds import (
    BoundCurve,
    CovariateCell,
    DgpSpec,
    EffectRequest,
    Population,
    Uniform,
    bound_curve,
    breakdown_c,
    dgp_population,
    effect_bounds,
    variant_spec,
)
from cdepbounds.breakdown import parse_grid, thread_count

from conftest import random_population

ATE = EffectRequest("ate")


@pytest.fixture(scope="module")
def baseline():
    return dgp_population(variant_spec("baseline"))


def test_grid_zero_is_point_identified(baseline):
    curve = bound_curve(baseline, ATE, [0.0])
    assert len(curve) == 1
    assert curve.lower[0] == pytest.approx(1.0, abs=1e-3)
    assert curve.upper[0] == pytest.approx(1.0, abs=1e-3)


def test_three_point_grid_nested(baseline):
    curve = bound_curve(baseline, ATE, [0.0, 0.5, 1.0])
    assert curve.is_nested()
    assert curve.rows()[1][0] == 0.5


def test_grid_validation(baseline):
    with pytest.raises(ValueError, match="sorted"):
        bound_curve(baseline, ATE, [0.5, 0.1])
    with pytest.raises(ValueError):
        bound_curve(baseline, ATE, [0.0, 1.2])
    with pytest.raises(ValueError):
        bound_curve(baseline, ATE, [])


def test_parse_grid():
    g = parse_grid("0:1:0.01")
    assert len(g) == 101 and g[0] == 0.0 and g[-1] == 1.0
    assert parse_grid("0, 0.25,0.5") == [0.0, 0.25, 0.5]
    with pytest.raises(ValueError):
        parse_grid("0:1")
    with pytest.raises(ValueError):
        parse_grid("1:0:0.1")


def test_strong_selection_widens_most_intervals(baseline):
    grid = parse_grid("0.01:0.99:0.01")
    base = bound_curve(baseline, ATE, grid)
    strong = bound_curve(dgp_population(variant_spec("p09")), ATE, grid)
    wider = np.mean(strong.upper - strong.lower > base.upper - base.lower)
    assert wider > 0.5


def test_threads_match_serial(baseline, monkeypatch):
    grid = [0.0, 0.1, 0.2, 0.3]
    serial = bound_curve(baseline, ATE, grid, threads=1)
    assert bound_curve(baseline, ATE, grid, threads=3) == serial
    monkeypatch.setenv("CDEP_THREADS", "2")
    assert thread_count() == 2
    assert bound_curve(baseline, ATE, grid) == serial
    monkeypatch.setenv("CDEP_THREADS", "zero")
    with pytest.raises(ValueError):
        thread_count()


# --- breakdown -----------------------------------------------------------------

def test_breakdown_baseline(baseline):
    assert breakdown_c(baseline, ATE) == pytest.approx(0.26, abs=0.01)


def test_breakdown_strong_selection():
    pop = dgp_population(variant_spec("p09"))
    assert breakdown_c(pop, ATE) == pytest.approx(0.085, abs=0.01)


def test_breakdown_certificate(baseline):
    tol = 1e-4
    b = breakdown_c(baseline, ATE, tol=tol)
    assert effect_bounds(baseline, ATE, b - tol).lower > 0
    assert effect_bounds(baseline, ATE, b + tol).lower <= 0


def test_breakdown_saturated():
    cell = CovariateCell("w", 1.0, 0.5, Uniform(2, 3), Uniform(0, 1))
    assert breakdown_c(Population((cell,)), ATE) == 1.0


def test_breakdown_negative_sign():
    cell = CovariateCell("w", 1.0, 0.5, Uniform(0, 1), Uniform(0.5, 1.5))
    pop = Population((cell,))
    b = breakdown_c(pop, ATE, sign="negative")
    assert 0.0 < b < 1.0
    assert effect_bounds(pop, ATE, b - 1e-4).upper < 0
    with pytest.raises(ValueError, match="not positive"):
        breakdown_c(pop, ATE, sign="positive")


def test_breakdown_argument_checks(baseline):
    with pytest.raises(ValueError):
        breakdown_c(baseline, ATE, sign="up")
    with pytest.raises(ValueError):
        breakdown_c(baseline, ATE, tol=0.0)


@settings(max_examples=10)
@given(st.floats(0.2, 1.5), st.floats(0.05, 1.0))
def test_breakdown_monotone_in_effect_size(pi_x, shift):
    small = dgp_population(DgpSpec(pi_x=pi_x))
    big = dgp_population(DgpSpec(pi_x=pi_x + shift))
    assert breakdown_c(big, ATE, tol=1e-3) >= breakdown_c(small, ATE, tol=1e-3) - 1e-3


@settings(max_examples=25)
@given(st.integers(0, 10_000))
def test_curve_nested_random(seed):
    pop = random_population(np.random.default_rng(seed))
    curve = bound_curve(pop, ATE, np.linspace(0, 1, 11))
    assert curve.is_nested(tol=1e-9)
    assert curve.intervals[0].width < 1e-9
    assert isinstance(curve, BoundCurve)
