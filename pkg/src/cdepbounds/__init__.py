"""Sharp bounds on treatment effects under conditional c-dependence."""

from .distributions import (
    AnalyticDistribution,
    CovariateCell,
    EmpiricalDistribution,
    Interval,
    Population,
    ScalarDistribution,
    TruncatedGaussian,
    Uniform,
    fit_empirical,
)
from .cdep import (
    CdepContext,
    SelectionFunction,
    cdf_from_selection,
    extremal_selection,
    generic_cdf_bounds,
    mixture_witness_cdf,
)
from .potential import (
    TauMap,
    WitnessParams,
    binary_ate_bounds,
    binary_prob_bounds,
    cond_cdf_bounds,
    cond_quantile_bounds,
    cqte_bounds,
    marginal_cdf_bounds,
    marginal_quantile_bounds,
    witness_cond_cdf,
)
from .effects import (
    EffectRequest,
    ate_bounds,
    att_bounds,
    atu_bounds,
    cate_bounds,
    cond_mean_bounds,
    effect_bounds,
    qte_bounds,
)

from ._version import __version__
from .calibration import PropensityTable, cbar_k, delta_quantiles
from .breakdown import BoundCurve, bound_curve, breakdown_c
from .oracle import DiscretizedProblem, lp_cdf_extremum, lp_mean_extremum, uniform_problem
from .data import Dataset, Schema, fit_population, load_dataset
from .dgp import DgpSpec, dgp_population, population_r2, variant_spec
