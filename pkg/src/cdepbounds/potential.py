"""
Bounds on distributions of potential outcomes ``Y_x`` under conditional
c-dependence: conditional cdfs and quantiles per covariate cell, marginal
cdfs and quantiles, conditional quantile treatment effects, the smooth
attainable cdfs approaching the bounds, and binary-outcome probabilities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cdep import lower_cdf_map, upper_cdf_map
from .distributions import CovariateCell, Interval, Population

__all__ = [
    "TauMap",
    "WitnessParams",
    "cond_cdf_lower",
    "cond_cdf_upper",
    "cond_cdf_bounds",
    "cond_quantile_bounds",
    "cqte_bounds",
    "marginal_cdf_bounds",
    "marginal_quantile_bounds",
    "witness_cond_cdf",
    "binary_prob_bounds",
    "binary_ate_bounds",
]


def _check_c(c: float) -> float:
    c = float(c)
    if not (0.0 <= c <= 1.0):
        raise ValueError(f"c must lie in [0, 1], got {c}")
    return c


def _arm_prob(cell: CovariateCell, x: int) -> float:
    if x not in (0, 1):
        raise ValueError(f"arm must be 0 or 1, got {x!r}")
    p = cell.arm_prob(x)
    if p <= 0.0:
        raise ValueError(f"cell {cell.label!r}: P(X={x} | W) = 0, arm {x} is not observed")
    return p


def _check_tau(tau: float) -> float:
    tau = float(tau)
    if not (0.0 < tau < 1.0):
        raise ValueError(f"tau must lie strictly inside (0, 1), got {tau}")
    return tau


@dataclass(frozen=True)
class TauMap:
    """Piecewise-linear map of [0, 1] into itself given by breakpoints.

    The quantile bounds are ``Q_{Y|X,W}(m(tau))`` with ``m`` the lower or
    upper cdf bound of the conditional rank variable.  Both maps are
    nondecreasing with ``m(0) = 0`` and ``m(1) = 1``.
    """

    xs: tuple[float, ...]
    ys: tuple[float, ...]
    direction: str

    @classmethod
    def build(cls, p: float, c: float, direction: str) -> "TauMap":
        if direction not in ("lower", "upper"):
            raise ValueError(f"direction must be 'lower' or 'upper', got {direction!r}")
        # every line involved: slopes/intercepts of the pieces of the min/max
        r = c / p
        if direction == "lower":
            lines = [(1.0 - r, 0.0), (1.0 + r, -r), (1.0 / p, 1.0 - 1.0 / p), (0.0, 0.0)]
            fn = lower_cdf_map
        else:
            lines = [(1.0 + r, 0.0), (1.0 - r, r), (1.0 / p, 0.0), (0.0, 1.0)]
            fn = upper_cdf_map
        cand = {0.0, 0.5, 1.0}
        for i, (a1, b1) in enumerate(lines):
            for a2, b2 in lines[i + 1:]:
                if a1 != a2:
                    t = (b2 - b1) / (a1 - a2)
                    if 0.0 < t < 1.0:
                        cand.add(t)
        xs = np.array(sorted(cand))
        ys = np.asarray(fn(xs, p, c), dtype=float)
        # snap rounding residue so flat pieces are exactly flat
        ys[np.abs(ys) < 1e-13] = 0.0
        ys[np.abs(ys - 1.0) < 1e-13] = 1.0
        # drop interior breakpoints where the map is locally linear
        keep = [0]
        for k in range(1, len(xs) - 1):
            s_left = (ys[k] - ys[keep[-1]]) / (xs[k] - xs[keep[-1]])
            s_right = (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k])
            if abs(s_left - s_right) > 1e-12 * (1.0 + abs(s_left)):
                keep.append(k)
        keep.append(len(xs) - 1)
        return cls(tuple(xs[keep].tolist()), tuple(ys[keep].tolist()), direction)

    def __call__(self, tau):
        return np.interp(tau, self.xs, self.ys)

    def segments(self):
        """Yield ``(t0, t1, m0, m1)`` for each linear piece."""
        for k in range(len(self.xs) - 1):
            yield self.xs[k], self.xs[k + 1], self.ys[k], self.ys[k + 1]


@dataclass(frozen=True)
class WitnessParams:
    """Mixing weight ``eps`` in [0, 1] and smoothing ``eta`` > 0."""

    eps: float
    eta: float

    def __post_init__(self):
        if not (0.0 <= self.eps <= 1.0):
            raise ValueError(f"eps must lie in [0, 1], got {self.eps}")
        if not self.eta > 0.0:
            raise ValueError(f"eta must be positive, got {self.eta}")


# ---------------------------------------------------------------------------
# conditional cdf bounds


def cond_cdf_upper(F, p: float, c: float):
    """Upper bound on ``F_{Y_x|W}`` as a function of the observed
    ``F = F_{Y|X,W}(y|x,w)``, valid inside the support.

    For ``c >= max(p, 1-p)`` this is exactly the no-assumption bound
    ``p F + 1 - p``.
    """
    pF = p * np.asarray(F, dtype=float)
    if c >= max(p, 1.0 - p):
        return pF + (1.0 - p)
    first = pF / (p - c) if p > c else np.ones_like(pF)
    return np.minimum(np.minimum(first, (pF + c) / (p + c)), pF + (1.0 - p))


def cond_cdf_lower(F, p: float, c: float):
    """Lower counterpart of :func:`cond_cdf_upper`; ``p F`` on the plateau."""
    pF = p * np.asarray(F, dtype=float)
    if c >= max(p, 1.0 - p):
        return pF
    middle = (pF - c) / (p - c) if p > c else np.zeros_like(pF)
    return np.maximum(np.maximum(pF / (p + c), middle), pF)


def cond_cdf_bounds(cell: CovariateCell, x: int, c: float, y: float) -> Interval:
    """Bounds on ``F_{Y_x|W}(y | w)``.

    Both bounds are 0 below the support of ``Y | X=x, W=w`` and 1 at or
    above its upper endpoint.
    """
    c = _check_c(c)
    p = _arm_prob(cell, x)
    dist = cell.arm(x)
    y = float(y)
    lo_y, hi_y = dist.support
    if y < lo_y:
        return Interval(0.0, 0.0)
    if y >= hi_y:
        return Interval(1.0, 1.0)
    F = dist.cdf(y)
    if c == 0.0:
        return Interval(F, F)
    return Interval(float(cond_cdf_lower(F, p, c)), float(cond_cdf_upper(F, p, c)))


def cond_quantile_bounds(cell: CovariateCell, x: int, c: float, tau: float) -> Interval:
    """Bounds on ``Q_{Y_x|W}(tau | w)`` by composing the observed quantile
    function with the rank-space cdf bounds."""
    c = _check_c(c)
    tau = _check_tau(tau)
    p = _arm_prob(cell, x)
    dist = cell.arm(x)
    lo = dist.quantile(lower_cdf_map(tau, p, c))
    hi = dist.quantile(upper_cdf_map(tau, p, c))
    return Interval(lo, hi)


def cqte_bounds(cell: CovariateCell, c: float, tau: float) -> Interval:
    """Bounds on ``Q_{Y_1|W}(tau|w) - Q_{Y_0|W}(tau|w)``."""
    q1 = cond_quantile_bounds(cell, 1, c, tau)
    q0 = cond_quantile_bounds(cell, 0, c, tau)
    return Interval(q1.lower - q0.upper, q1.upper - q0.lower)


# ---------------------------------------------------------------------------
# marginal (covariate-averaged) bounds


def _marginal_cdf_arrays(pop: Population, x: int, c: float, y: np.ndarray):
    lower = np.zeros_like(y)
    upper = np.zeros_like(y)
    for cell in pop.cells:
        if cell.weight == 0.0:
            continue
        p = _arm_prob(cell, x)
        dist = cell.arm(x)
        lo_y, hi_y = dist.support
        F = dist.cdf(y)
        if c == 0.0:
            lo_c, hi_c = F, F
        else:
            lo_c, hi_c = cond_cdf_lower(F, p, c), cond_cdf_upper(F, p, c)
        below = y < lo_y
        above = y >= hi_y
        lo_c = np.where(below, 0.0, np.where(above, 1.0, lo_c))
        hi_c = np.where(below, 0.0, np.where(above, 1.0, hi_c))
        lower = lower + cell.weight * lo_c
        upper = upper + cell.weight * hi_c
    return lower, upper


def marginal_cdf_bounds(pop: Population, x: int, c: float, y: float) -> Interval:
    """Bounds on ``F_{Y_x}(y)``: cell-weighted averages of the conditional
    cdf bounds."""
    c = _check_c(c)
    y = float(y)
    if not math.isfinite(y):
        raise ValueError("y must be finite")
    lo, hi = _marginal_cdf_arrays(pop, x, c, np.array([y]))
    return Interval(float(lo[0]), float(hi[0]))


def _arm_hull(pop: Population, x: int) -> tuple[float, float]:
    lows, highs = zip(*(cell.arm(x).support for cell in pop.cells))
    return min(lows), max(highs)


def _left_inverse(fn, tau: float, lo: float, hi: float, max_iter: int = 40) -> float:
    """Smallest ``y`` with ``fn(y) >= tau`` for nondecreasing, vectorized ``fn``.

    ``lo``/``hi`` are starting guesses; infinite ends are replaced by a
    bracket grown geometrically until it straddles the target.  The bracket
    is then refined on a 64-point grid per pass.
    """
    def f(v):
        return float(fn(np.array([v]))[0])

    if not math.isfinite(lo):
        step = 1.0
        lo = (hi if math.isfinite(hi) else 0.0) - step
        while f(lo) >= tau:
            step *= 2.0
            lo -= step
            if step > 1e300:
                return -math.inf
    elif f(lo) >= tau:
        return lo
    if not math.isfinite(hi):
        step = 1.0
        hi = lo + step
        while f(hi) < tau:
            step *= 2.0
            hi += step
            if step > 1e300:
                return math.inf
    for _ in range(max_iter):
        if hi - lo <= 1e-13 * (1.0 + abs(hi)):
            break
        pts = np.linspace(lo, hi, 66)[1:-1]
        hit = np.flatnonzero(fn(pts) >= tau)
        if hit.size == 0:
            lo = float(pts[-1])
        else:
            j = int(hit[0])
            hi = float(pts[j])
            if j > 0:
                lo = float(pts[j - 1])
    return hi


def marginal_quantile_bounds(pop: Population, x: int, c: float, tau: float) -> Interval:
    """Bounds on ``Q_{Y_x}(tau)`` by left-inverting the marginal cdf bounds.

    The lower quantile bound inverts the upper cdf bound and vice versa.
    """
    c = _check_c(c)
    tau = _check_tau(tau)
    lo_y, hi_y = _arm_hull(pop, x)

    def upper_cdf(y):
        return _marginal_cdf_arrays(pop, x, c, y)[1]

    def lower_cdf(y):
        return _marginal_cdf_arrays(pop, x, c, y)[0]

    # start just below the hull so a jump at the lower endpoint is found
    q_lo = _left_inverse(upper_cdf, tau, lo_y, hi_y)
    q_hi = _left_inverse(lower_cdf, tau, lo_y, hi_y)
    return Interval(q_lo, q_hi)


# ---------------------------------------------------------------------------
# attainable smooth cdfs


def _witness_primitives(p: float, c: float, eta: float):
    """Return ``(G_low_first, G_high_first)``: the rank-space cdfs induced by
    the eta-perturbed extremal selection functions."""
    lo = max(p - c, eta)
    hi = min(p + c, 1.0 - eta)

    def g_low_first(d):
        # convex: lo on early ranks, hi on late ranks
        return np.maximum(lo * d / p, 1.0 - hi * (1.0 - d) / p)

    def g_high_first(d):
        return np.minimum(hi * d / p, 1.0 - lo * (1.0 - d) / p)

    return g_low_first, g_high_first


def witness_cond_cdf(cell: CovariateCell, x: int, c: float, wp: WitnessParams, y: float) -> float:
    """Attainable strictly increasing cdf of ``Y_x | W = w``.

    ``eps = 1`` gives the approximation to the upper bound, ``eps = 0`` the
    approximation to the lower bound; both converge monotonically to the
    bounds as ``eta`` decreases to 0.  Intermediate ``eps`` solve the mixed
    integral equation by bisection.
    """
    c = _check_c(c)
    p = _arm_prob(cell, x)
    if not (0.0 < wp.eta < min(p, 1.0 - p)):
        raise ValueError(f"eta must lie in (0, {min(p, 1.0 - p)}), got {wp.eta}")
    dist = cell.arm(x)
    lo_y, hi_y = dist.support
    y = float(y)
    if y < lo_y:
        return 0.0
    if y >= hi_y:
        return 1.0
    F = dist.cdf(y)
    if c == 0.0:
        return F
    eta, eps = wp.eta, wp.eps
    lo = max(p - c, eta)
    hi = min(p + c, 1.0 - eta)
    pF = p * F
    if eps == 1.0:
        return min(float(min(pF / lo, (pF + c) / hi, (pF + 1.0 - eta - p) / hi)), 1.0)
    if eps == 0.0:
        return min(float(max(pF / (p + c), (pF - min(c, p - eta)) / lo, pF / (1.0 - eta))), 1.0)
    g1, g0 = _witness_primitives(p, c, eta)
    a, b = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (a + b)
        if eps * g1(mid) + (1.0 - eps) * g0(mid) < F:
            a = mid
        else:
            b = mid
        if b - a <= 1e-13:
            break
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# binary outcomes


def binary_prob_bounds(cell: CovariateCell, x: int, c: float, both_levels: bool = False) -> Interval:
    """Bounds on ``P(Y_x = 1 | W = w)`` for binary outcomes.

    By default c-dependence is imposed on ``P(X = x | Y_x = 1, W = w)``
    only, which gives ``[a / min(p+c, 1), min{a / (p-c), a + 1 - p}]`` with
    ``a = P(Y=1 | X=x, W=w) p``.  With ``both_levels`` the constraint is
    also imposed at ``Y_x = 0``, which can tighten either endpoint.
    """
    c = _check_c(c)
    p = _arm_prob(cell, x)
    if c == 0.0:
        s = cell.success(x)
        return Interval(s, s)
    joint = cell.success(x) * p
    lower = joint / min(p + c, 1.0)
    first = joint / (p - c) if p > c else 1.0
    upper = min(first, joint + (1.0 - p))
    if both_levels:
        other = (1.0 - cell.success(x)) * p
        upper = min(upper, 1.0 - other / min(p + c, 1.0))
        if p > c:
            lower = max(lower, 1.0 - other / (p - c))
        # for tiny c the two levels can cross by rounding
        lower = min(lower, upper)
    return Interval(lower, upper)


def binary_ate_bounds(pop: Population, c: float, both_levels: bool = False) -> Interval:
    """Bounds on ``P(Y_1 = 1) - P(Y_0 = 1)``."""
    if not pop.is_binary:
        raise ValueError("binary_ate_bounds needs every cell to carry binary success probabilities")
    lo1 = hi1 = lo0 = hi0 = 0.0
    for cell in pop.cells:
        b1 = binary_prob_bounds(cell, 1, c, both_levels)
        b0 = binary_prob_bounds(cell, 0, c, both_levels)
        lo1 += cell.weight * b1.lower
        hi1 += cell.weight * b1.upper
        lo0 += cell.weight * b0.lower
        hi0 += cell.weight * b0.upper
    return Interval(lo1 - hi0, hi1 - lo0)

