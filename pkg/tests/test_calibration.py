import numpy as np
import pytest
from hypothesis import given, strategies as st

from cdepbounds import CovariateCell, Population, PropensityTable, Uniform, cbar_k, delta_quantiles
from cdepbounds.calibration import calibration_report, propensity_gaps

FOUR_CELL = PropensityTable(((0, 0), (0, 1), (1, 0), (1, 1)), (0.4, 0.5, 0.6, 0.7), (1, 1, 1, 1))


def test_four_cell_example():
    # marginals over w2 are 0.5 and 0.6, every gap is 0.1
    assert cbar_k(FOUR_CELL, 0) == pytest.approx(0.1, abs=1e-12)
    assert delta_quantiles(FOUR_CELL, 0, [1.0]) == [cbar_k(FOUR_CELL, 0)]
    assert delta_quantiles(FOUR_CELL, 0, [0.5]) == pytest.approx([0.1], abs=1e-12)


def test_second_covariate():
    # marginals over w1 are 0.5 and 0.6, gaps 0.05 each
    assert cbar_k(FOUR_CELL, 1) == pytest.approx(0.05, abs=1e-12)


def test_constant_table_gives_zero():
    t = PropensityTable(((0, 0), (0, 1), (1, 0)), (0.3, 0.3, 0.3), (1, 2, 3))
    assert cbar_k(t, 0) == 0.0
    assert delta_quantiles(t, 1, [0.1, 0.5, 0.9]) == [0.0, 0.0, 0.0]


def test_single_covariate_compares_with_p1():
    t = PropensityTable((0, 1), (0.4, 0.6), (1, 1))
    assert cbar_k(t, 0) == pytest.approx(0.1, abs=1e-12)


def test_weighted_quantile_left_inverse():
    t = PropensityTable((0, 1, 2), (0.2, 0.5, 0.9), (0.5, 0.25, 0.25))
    gaps, w = propensity_gaps(t, 0)
    # p1 = 0.45 so gaps are 0.25, 0.05, 0.45
    assert gaps == pytest.approx([0.25, 0.05, 0.45])
    assert delta_quantiles(t, 0, [0.25, 0.26, 0.75, 0.76]) == pytest.approx([0.05, 0.25, 0.25, 0.45])


def test_min_cell_weight_filter():
    t = PropensityTable((0, 1, 2), (0.5, 0.5, 1.0), (0.45, 0.45, 0.1))
    assert cbar_k(t, 0) > 0.4
    assert cbar_k(t, 0, min_cell_weight=0.2) == 0.0
    with pytest.raises(ValueError, match="no cells"):
        cbar_k(t, 0, min_cell_weight=0.5)


def test_errors():
    with pytest.raises(ValueError, match="empty"):
        PropensityTable((), (), ())
    with pytest.raises(ValueError):
        PropensityTable(((0, 0), (1,)), (0.5, 0.5), (1, 1))
    with pytest.raises(IndexError):
        cbar_k(FOUR_CELL, 2)
    with pytest.raises(KeyError):
        cbar_k(FOUR_CELL, "age")
    with pytest.raises(ValueError):
        delta_quantiles(FOUR_CELL, 0, [1.5])


def test_names_and_report():
    t = PropensityTable(FOUR_CELL.keys, FOUR_CELL.propensities, FOUR_CELL.weights, ("sex", "region"))
    assert cbar_k(t, "region") == pytest.approx(0.05)
    rows = calibration_report(t, probs=(0.5, 0.9))
    assert [r["covariate"] for r in rows] == ["sex", "region"]
    assert set(rows[0]) == {"covariate", "cbar", "q50", "q90"}


def test_from_population():
    cells = tuple(CovariateCell(f"{a}|{b}", 0.25, p, Uniform(), Uniform())
                  for (a, b), p in zip(FOUR_CELL.keys, FOUR_CELL.propensities))
    t = PropensityTable.from_population(Population(cells))
    assert cbar_k(t, 0) == pytest.approx(0.1, abs=1e-12)


tables = st.integers(0, 10_000).map(lambda s: _random_table(np.random.default_rng(s)))


def _random_table(rng):
    levels = (int(rng.integers(2, 4)), int(rng.integers(2, 4)))
    keys = [(a, b) for a in range(levels[0]) for b in range(levels[1])]
    return PropensityTable(tuple(keys), tuple(rng.uniform(0, 1, len(keys))), tuple(rng.uniform(0.1, 1, len(keys))))


@given(tables, st.integers(0, 1))
def test_prob_one_equals_cbar(t, k):
    assert delta_quantiles(t, k, [1.0])[0] == cbar_k(t, k)


@given(tables, st.integers(0, 1), st.lists(st.floats(0, 1), min_size=1, max_size=5))
def test_outputs_in_unit_interval(t, k, probs):
    assert all(0.0 <= v <= 1.0 for v in delta_quantiles(t, k, probs))
    assert 0.0 <= cbar_k(t, k) <= 1.0


@given(tables, st.integers(0, 1), st.integers(0, 10_000))
def test_relabel_invariance(t, k, seed):
    rng = np.random.default_rng(seed)
    maps = [dict(zip(sorted({key[j] for key in t.keys}), rng.permutation(10)[:5].tolist()))
            for j in range(2)]
    keys = tuple((f"a{maps[0][a]}", f"b{maps[1][b]}") for a, b in t.keys)
    t2 = PropensityTable(keys, t.propensities, t.weights)
    assert cbar_k(t2, k) == pytest.approx(cbar_k(t, k), abs=1e-15)
