import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cdepbounds import CovariateCell, Population, TruncatedGaussian, Uniform, fit_empirical

settings.register_profile("default", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def unit_cell():
    """Both arms uniform on [0, 1], half treated."""
    return CovariateCell("w", 1.0, 0.5, Uniform(0, 1), Uniform(0, 1))


def random_distribution(rng):
    kind = rng.integers(3)
    if kind == 0:
        lo = rng.normal()
        return Uniform(lo, lo + rng.uniform(0.2, 3.0))
    if kind == 1:
        return TruncatedGaussian(rng.normal(), rng.uniform(0.3, 2.0))
    return fit_empirical(rng.normal(size=int(rng.integers(2, 25))) * rng.uniform(0.5, 2))


def random_cell(rng, label="w", weight=1.0, propensity=None):
    p = rng.uniform(0.05, 0.95) if propensity is None else propensity
    return CovariateCell(label, weight, p, random_distribution(rng), random_distribution(rng))


def random_population(rng, n_cells=None):
    k = int(rng.integers(1, 5)) if n_cells is None else n_cells
    w = rng.dirichlet(np.ones(k))
    w[-1] = 1.0 - w[:-1].sum()
    return Population(tuple(random_cell(rng, f"w{j}", float(w[j])) for j in range(k)))
