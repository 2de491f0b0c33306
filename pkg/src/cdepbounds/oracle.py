"""
Brute-force checks of the closed-form bounds on discretized problems.

Each problem is a box-constrained linear program with one budget constraint
and a linear objective, which a fractional-knapsack greedy solves exactly:
start every variable at its lower limit, then spend the remaining budget on
the best objective coefficients first.

Two discretizations are supported.

``space="rank"``
    ``masses`` are the bin probabilities of ``U``.  The unknowns are the
    treatment probabilities ``r_b = P(X=x | U in bin b)`` with
    ``r_b in [max(p-c, 0), min(p+c, 1)]`` and ``sum_b m_b r_b = p``.  The
    objective is a functional of the arm-conditional law of ``U``.

``space="outcome"``
    ``masses`` are the bin probabilities of the observed arm-conditional law
    ``Y | X=x``.  The unknowns are the marginal bin probabilities ``s_b`` of
    ``Y_x``.  c-dependence requires ``p m_b / s_b in [floor, cap]``, i.e.
    ``s_b in [p m_b / cap, p m_b / floor]``, with ``sum_b s_b = 1``.  Bins of
    zero observed mass may carry marginal mass only when ``floor = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "DiscretizedProblem",
    "uniform_problem",
    "lp_cdf_extremum",
    "lp_mean_extremum",
    "greedy_box_budget",
    "outcome_problem",
    "lp_binary_extremum",
    "verify_suite",
]

_SPACES = ("rank", "outcome")


@dataclass(frozen=True)
class DiscretizedProblem:
    """Binned problem: ordered bin ``edges``, bin ``masses`` summing to one,
    arm probability ``p_x`` and sensitivity ``c``."""

    edges: np.ndarray
    masses: np.ndarray
    p_x: float
    c: float
    space: str = "rank"

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        masses = np.asarray(self.masses, dtype=float)
        if edges.ndim != 1 or masses.ndim != 1 or edges.size != masses.size + 1:
            raise ValueError("need one more edge than there are masses")
        if np.any(np.diff(edges) < 0):
            raise ValueError("bin edges must be nondecreasing")
        if np.any(masses < 0) or abs(masses.sum() - 1.0) > 1e-9:
            raise ValueError("masses must be nonnegative and sum to one")
        if not (0.0 < self.p_x < 1.0):
            raise ValueError(f"p_x must lie in (0, 1), got {self.p_x}")
        if not (0.0 <= self.c <= 1.0):
            raise ValueError(f"c must lie in [0, 1], got {self.c}")
        if self.space not in _SPACES:
            raise ValueError(f"space must be one of {_SPACES}, got {self.space!r}")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "masses", masses / masses.sum())

    @property
    def floor(self) -> float:
        return max(self.p_x - self.c, 0.0)

    @property
    def cap(self) -> float:
        return min(self.p_x + self.c, 1.0)

    @property
    def n_bins(self) -> int:
        return self.masses.size

    def split_at(self, u: float) -> "DiscretizedProblem":
        """Copy with ``u`` inserted as an edge, the straddling bin's mass
        divided in proportion to length."""
        e = self.edges
        if u <= e[0] or u >= e[-1] or np.any(e == u):
            return self
        j = int(np.searchsorted(e, u)) - 1
        frac = (u - e[j]) / (e[j + 1] - e[j])
        m = self.masses
        masses = np.concatenate([m[:j], [m[j] * frac, m[j] * (1.0 - frac)], m[j + 1:]])
        edges = np.concatenate([e[: j + 1], [u], e[j + 1:]])
        return DiscretizedProblem(edges, masses, self.p_x, self.c, self.space)


def uniform_problem(n_bins: int, p_x: float, c: float) -> DiscretizedProblem:
    """``n_bins`` equal bins on [0, 1] in rank space."""
    if n_bins < 1:
        raise ValueError("n_bins must be positive")
    return DiscretizedProblem(np.linspace(0.0, 1.0, n_bins + 1),
                              np.full(n_bins, 1.0 / n_bins), p_x, c)


def greedy_box_budget(weights, lo, hi, budget: float, score, maximize: bool = True):
    """Solve ``max/min sum score_b w_b z_b`` s.t. ``lo_b <= z_b <= hi_b`` and
    ``sum w_b z_b = budget``.

    ``hi`` may contain ``inf``.  Ties in ``score`` are broken by index, so
    the result is deterministic.

    Returns
    -------
    z : ndarray
        An optimal solution.
    """
    w = np.asarray(weights, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    score = np.asarray(score, dtype=float)
    z = lo.copy()
    used = float(np.dot(w, np.where(w > 0, lo, 0.0)))
    room = budget - used
    if room < -1e-12:
        raise ValueError("infeasible budget: lower limits already exceed it")
    order = np.argsort(-score if maximize else score, kind="stable")
    for b in order:
        if room <= 0.0:
            break
        if w[b] <= 0.0:
            continue
        width = hi[b] - lo[b]
        step = width if width * w[b] <= room else room / w[b]
        z[b] += step
        room -= step * w[b]
    if room > 1e-12 * max(1.0, budget):
        raise ValueError("infeasible budget: upper limits cannot reach it")
    return z


def lp_cdf_extremum(prob: DiscretizedProblem, u: float, direction: str,
                    return_selection: bool = False):
    """Extremize ``F_{U|X}(u | x) = (1/p_x) sum_{bins <= u} m_b r_b`` over
    admissible rank-space selection probabilities.

    ``u`` is inserted as a bin edge before solving, so the answer is exact
    for the piecewise-uniform ``U`` the bins describe.
    """
    if prob.space != "rank":
        raise ValueError("lp_cdf_extremum works in rank space")
    if direction not in ("min", "max"):
        raise ValueError(f"direction must be 'min' or 'max', got {direction!r}")
    u = float(u)
    e = prob.edges
    if u >= e[-1]:
        r = np.full(prob.n_bins, prob.p_x)
        return (1.0, r) if return_selection else 1.0
    if u <= e[0]:
        r = np.full(prob.n_bins, prob.p_x)
        return (0.0, r) if return_selection else 0.0
    sp = prob.split_at(u)
    below = (sp.edges[1:] <= u).astype(float)
    n = sp.n_bins
    r = greedy_box_budget(sp.masses, np.full(n, sp.floor), np.full(n, sp.cap),
                          sp.p_x, below, maximize=(direction == "max"))
    value = float(np.dot(sp.masses * below, r) / sp.p_x)
    value = min(max(value, 0.0), 1.0)
    return (value, r) if return_selection else value


def lp_mean_extremum(prob: DiscretizedProblem, values: Sequence[float], direction: str,
                     return_solution: bool = False):
    """Extremize a mean over the admissible discretized laws.

    In rank space this is ``E(U | X=x) = sum_b m_b r_b v_b / p_x``; in outcome
    space it is ``E(Y_x) = sum_b s_b v_b``.  ``values`` holds one value per
    bin.
    """
    if direction not in ("min", "max"):
        raise ValueError(f"direction must be 'min' or 'max', got {direction!r}")
    v = np.asarray(values, dtype=float)
    if v.shape != prob.masses.shape:
        raise ValueError(f"need {prob.n_bins} values, got {v.size}")
    maximize = direction == "max"
    n = prob.n_bins
    m = prob.masses
    if prob.space == "rank":
        z = greedy_box_budget(m, np.full(n, prob.floor), np.full(n, prob.cap),
                              prob.p_x, v, maximize)
        value = float(np.sum(m * z * v) / prob.p_x)
    else:
        pm = prob.p_x * m
        lo = pm / prob.cap
        with np.errstate(divide="ignore", invalid="ignore"):
            hi = np.where(pm > 0, pm / prob.floor if prob.floor > 0 else np.inf,
                          np.inf if prob.floor == 0 else 0.0)
        z = greedy_box_budget(np.ones(n), lo, hi, 1.0, v, maximize)
        value = float(np.dot(z, v))
    return (value, z) if return_solution else value


def outcome_problem(dist, p_x: float, c: float, n_bins: int = 1000):
    """Outcome-space problem for an observed arm law ``dist``.

    Bins have equal observed mass and carry their conditional means; two
    zero-mass bins at the support endpoints let unobserved mass sit at the
    extremes when ``p_x <= c``.  Returns ``(problem, values)``.
    """
    t = np.linspace(0.0, 1.0, n_bins + 1)
    q = np.asarray(dist.quantile(t), dtype=float)
    means = np.array([dist.partial_expectation(t[i], t[i + 1]) * n_bins for i in range(n_bins)])
    lo, hi = dist.support
    edges = np.concatenate([[lo], q, [hi]])
    masses = np.concatenate([[0.0], np.full(n_bins, 1.0 / n_bins), [0.0]])
    prob = DiscretizedProblem(edges, masses, p_x, c, "outcome")
    return prob, np.concatenate([[lo], means, [hi]])


def lp_binary_extremum(success: float, p_x: float, c: float, direction: str,
                       both_levels: bool = False) -> float:
    """Extremize ``P(Y_x = 1)`` for a binary outcome.

    The unknowns are ``s_1 = P(Y_x=1)`` and ``s_0 = 1 - s_1``.  The treated
    joint masses ``a = success p_x`` and ``b = (1 - success) p_x`` are
    observed.  c-dependence always constrains ``a / s_1``; with
    ``both_levels`` it also constrains ``b / s_0``, otherwise ``s_0`` only
    has to cover ``b``.
    """
    if direction not in ("min", "max"):
        raise ValueError(f"direction must be 'min' or 'max', got {direction!r}")
    floor, cap = max(p_x - c, 0.0), min(p_x + c, 1.0)
    a, b = success * p_x, (1.0 - success) * p_x
    inf = np.inf
    lo = [a / cap, b / cap if both_levels else b]
    hi = [a / floor if floor > 0 else inf, (b / floor if floor > 0 else inf) if both_levels else inf]
    z = greedy_box_budget(np.ones(2), lo, hi, 1.0, [1.0, 0.0], maximize=(direction == "max"))
    return float(z[0])


def verify_suite(n_cdf: int = 500, n_mean: int = 100, n_bins: int = 1000, seed: int = 0) -> dict:
    """Compare the closed forms with the greedy programs on random
    instances and report the largest discrepancies."""
    from .cdep import CdepContext, generic_cdf_bounds
    from .distributions import CovariateCell, TruncatedGaussian, fit_empirical
    from .effects import cond_mean_bounds

    rng = np.random.default_rng(seed)
    cdf_err = 0.0
    for _ in range(n_cdf):
        p, c, u = rng.uniform(0.01, 0.99), rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)
        b = generic_cdf_bounds(CdepContext(p, c), u)
        prob = uniform_problem(n_bins, p, c)
        cdf_err = max(cdf_err, abs(lp_cdf_extremum(prob, u, "min") - b.lower),
                      abs(lp_cdf_extremum(prob, u, "max") - b.upper))
    mean_err = 0.0
    for k in range(n_mean):
        if k % 2:
            dist = TruncatedGaussian(rng.normal(), rng.uniform(0.3, 2.0))
        else:
            dist = fit_empirical(rng.normal(size=int(rng.integers(3, 30))))
        p, c = rng.uniform(0.05, 0.95), rng.uniform(0.0, 1.0)
        b = cond_mean_bounds(CovariateCell("v", 1.0, p, dist, dist), 1, c)
        prob, values = outcome_problem(dist, p, c, n_bins)
        mean_err = max(mean_err, abs(lp_mean_extremum(prob, values, "min") - b.lower),
                       abs(lp_mean_extremum(prob, values, "max") - b.upper))
    return {"cdf_cases": n_cdf, "cdf_max_error": cdf_err, "cdf_tolerance": 2e-3,
            "mean_cases": n_mean, "mean_max_error": mean_err, "mean_tolerance": 5e-3,
            "bins": n_bins, "seed": seed,
            "passed": bool(cdf_err <= 2e-3 and mean_err <= 5e-3)}
