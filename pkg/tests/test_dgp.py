import pytest
from hypothesis import given, settings, strategies as st

from cdepbounds import DgpSpec, ate_bounds, dgp_population, population_r2, variant_spec
from cdepbounds.dgp import SIGMA_R2_15, SIGMA_R2_60, VARIANTS, simulate_r2, solve_sigma


def test_baseline_cells():
    pop = dgp_population(variant_spec("baseline"))
    cell = pop.cell("w=1")
    assert cell.dist1.loc == pytest.approx(2.0) and cell.dist1.scale == pytest.approx(1.165)
    assert pop.p1 == pytest.approx(0.5, abs=1e-15)
    assert [c.weight for c in pop.cells] == [0.5, 0.5]


def test_zero_weight_cell_dropped():
    pop = dgp_population(DgpSpec(q=0.0))
    assert [c.label for c in pop.cells] == ["w=0"]


def test_spec_validation():
    with pytest.raises(ValueError):
        DgpSpec(p_given_w1=1.0)
    with pytest.raises(ValueError):
        DgpSpec(gamma_x=-1.0)
    with pytest.raises(ValueError):
        DgpSpec.from_dict({"rho": 1})
    with pytest.raises(KeyError, match="unknown dgp"):
        variant_spec("p07")
    assert DgpSpec.from_dict(DgpSpec().to_dict()) == DgpSpec()


@pytest.mark.parametrize("name", sorted(VARIANTS))
def test_every_variant_has_unit_ate(name):
    b = ate_bounds(dgp_population(variant_spec(name)), 0.0)
    assert b.lower == pytest.approx(1.0, abs=1e-9) and b.width < 1e-9


def test_baseline_r2_matches_simulation():
    spec = variant_spec("baseline")
    assert simulate_r2(spec, 2_000_000, seed=1) == pytest.approx(population_r2(spec), abs=3e-3)


@pytest.mark.parametrize("sigma, target", [(SIGMA_R2_15, 0.15), (SIGMA_R2_60, 0.60)])
def test_frozen_sigmas(sigma, target):
    spec = DgpSpec(sigma=sigma)
    assert population_r2(spec) == pytest.approx(target, abs=1e-12)
    assert solve_sigma(DgpSpec(), target) == pytest.approx(sigma, rel=1e-10)
    assert simulate_r2(spec, 2_000_000, seed=2) == pytest.approx(target, abs=3e-3)


def test_solve_sigma_rejects_bad_target():
    with pytest.raises(ValueError):
        solve_sigma(DgpSpec(), 1.0)


@settings(max_examples=30)
@given(st.floats(0.2, 3.0), st.floats(0.2, 3.0))
def test_r2_decreases_in_sigma(s1, s2):
    s1, s2 = sorted((s1, s2))
    assert population_r2(DgpSpec(sigma=s1)) >= population_r2(DgpSpec(sigma=s2))
