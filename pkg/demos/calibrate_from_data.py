"""
From a data file to bounds and a benchmark for c
================================================

Simulate a dataset with two binary covariates, write it as a CSV file, fit
a cell population, and ask which values of ``c`` are comparable to the
selection already visible on observed covariates.
"""

import tempfile
from pathlib import Path

import numpy as np

from cdepbounds import EffectRequest, Schema, effect_bounds, fit_population, load_dataset
from cdepbounds.calibration import PropensityTable, calibration_report
from cdepbounds.data import write_dataset

rng = np.random.default_rng(7)
n = 20_000
age = rng.integers(0, 2, n)
region = rng.integers(0, 2, n)
x = (rng.random(n) < 0.25 + 0.3 * age + 0.1 * region).astype(int)
y = 0.5 * x + age + 0.3 * region + rng.normal(size=n)

path = Path(tempfile.mkdtemp()) / "sample.csv"
write_dataset(path, y, x, [(str(a), str(r)) for a, r in zip(age, region)], ("age", "region"))

# %%
# Fit one cell per (age, region) pair.
data = load_dataset(path, Schema(covariates=("age", "region")))
pop = fit_population(data)
for cell in pop.cells:
    print(f"cell {cell.label}: weight {cell.weight:.3f}, propensity {cell.propensity:.3f}")

# %%
# Leaving out ``age`` moves the propensity by up to cbar; leaving out
# ``region`` moves it less.
table = PropensityTable.from_population(pop, ("age", "region"))
for row in calibration_report(table):
    print(f"{row['covariate']:>7}: cbar {row['cbar']:.3f}, median gap {row['q50']:.3f}")

# %%
# Bounds at the two benchmarks.
ate = EffectRequest("ate")
for row in calibration_report(table):
    iv = effect_bounds(pop, ate, row["cbar"])
    print(f"c = cbar({row['covariate']}) = {row['cbar']:.3f}: ATE in [{iv.lower:.3f}, {iv.upper:.3f}]")
