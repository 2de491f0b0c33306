"""
Bounds on mean-type and quantile-type treatment effect parameters.

Mean bounds integrate the quantile bounds over ``tau`` exactly: the
argument of the observed quantile function is a piecewise-linear map of
``tau``, so each linear piece becomes a partial expectation of the observed
distribution and each flat piece a single quantile times its length.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .distributions import CovariateCell, Interval, Population
from .potential import (
    TauMap,
    _arm_prob,
    _check_c,
    _check_tau,
    binary_ate_bounds,
    cqte_bounds,
    marginal_quantile_bounds,
)

__all__ = [
    "EffectRequest",
    "PARAMETERS",
    "cond_mean_bounds",
    "cate_bounds",
    "ate_bounds",
    "qte_bounds",
    "att_bounds",
    "atu_bounds",
    "effect_bounds",
]

PARAMETERS = ("ate", "cate", "qte", "cqte", "att", "atu", "binary-ate")


@dataclass(frozen=True)
class EffectRequest:
    """Which parameter to bound.

    ``tau`` is required for ``qte``/``cqte`` and ``cell`` (a cell label) for
    ``cate``/``cqte``.
    """

    kind: str
    tau: Optional[float] = None
    cell: Optional[str] = None

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        if kind not in PARAMETERS:
            raise ValueError(f"unknown parameter {self.kind!r}; choose from {', '.join(PARAMETERS)}")
        if kind in ("qte", "cqte"):
            if self.tau is None:
                raise ValueError(f"{kind} needs tau")
            _check_tau(self.tau)
        if kind in ("cate", "cqte") and self.cell is None:
            raise ValueError(f"{kind} needs a cell label")

    @property
    def label(self) -> str:
        parts = [self.kind]
        if self.tau is not None:
            parts.append(f"tau={self.tau:g}")
        if self.cell is not None:
            parts.append(f"cell={self.cell}")
        return " ".join(parts)


def _integrated_quantile(cell: CovariateCell, x: int, tau_map: TauMap) -> float:
    dist = cell.arm(x)
    total = 0.0
    for t0, t1, m0, m1 in tau_map.segments():
        if t1 <= t0:
            continue
        if m1 - m0 > 1e-12 * (t1 - t0):
            total += (t1 - t0) / (m1 - m0) * dist.partial_expectation(m0, m1)
        else:
            level = dist.quantile(min(max(0.5 * (m0 + m1), 0.0), 1.0))
            if math.isinf(level):
                return level
            total += level * (t1 - t0)
    return total


def cond_mean_bounds(cell: CovariateCell, x: int, c: float) -> Interval:
    """Bounds on ``E(Y_x | W = w)``: the integrals over ``tau`` of the lower
    and upper conditional quantile bounds.

    Returns infinite endpoints when the quantile bound sits at an infinite
    support endpoint on a set of positive length.
    """
    c = _check_c(c)
    p = _arm_prob(cell, x)
    if c == 0.0:
        m = cell.arm(x).mean()
        return Interval(m, m)
    lo = _integrated_quantile(cell, x, TauMap.build(p, c, "lower"))
    hi = _integrated_quantile(cell, x, TauMap.build(p, c, "upper"))
    return Interval(lo, hi)


def cate_bounds(cell: CovariateCell, c: float) -> Interval:
    e1 = cond_mean_bounds(cell, 1, c)
    e0 = cond_mean_bounds(cell, 0, c)
    return Interval(e1.lower - e0.upper, e1.upper - e0.lower)


def _require_overlap(pop: Population) -> None:
    bad = [cell.label for cell in pop.cells if not (0.0 < cell.propensity < 1.0)]
    if bad:
        raise ValueError(f"overlap fails (propensity 0 or 1) in cells: {', '.join(bad)}")


def ate_bounds(pop: Population, c: float) -> Interval:
    """Bounds on ATE: the cell-weighted average of the CATE bounds."""
    _require_overlap(pop)
    lo = hi = 0.0
    for cell in pop.cells:
        b = cate_bounds(cell, c)
        lo += cell.weight * b.lower
        hi += cell.weight * b.upper
    return Interval(lo, hi)


def qte_bounds(pop: Population, c: float, tau: float) -> Interval:
    """Bounds on ``Q_{Y_1}(tau) - Q_{Y_0}(tau)`` from the marginal quantile
    bounds of each arm."""
    _require_overlap(pop)
    q1 = marginal_quantile_bounds(pop, 1, c, tau)
    q0 = marginal_quantile_bounds(pop, 0, c, tau)
    return Interval(q1.lower - q0.upper, q1.upper - q0.lower)


def _observed_arm_mean(pop: Population, x: int) -> float:
    """``E(Y | X = x)``."""
    num = 0.0
    for cell in pop.cells:
        w = cell.weight * cell.arm_prob(x)
        if w > 0.0:
            num += w * cell.arm(x).mean()
    return num / (pop.p1 if x == 1 else pop.p0)


def _potential_mean_bounds(pop: Population, x: int, c: float) -> Interval:
    lo = hi = 0.0
    for cell in pop.cells:
        b = cond_mean_bounds(cell, x, c)
        lo += cell.weight * b.lower
        hi += cell.weight * b.upper
    return Interval(lo, hi)


def att_bounds(pop: Population, c: float) -> Interval:
    """Bounds on ``E(Y_1 - Y_0 | X = 1)``.

    Only ``Y_0`` is partially identified, so c-dependence is imposed on
    ``Y_0`` alone and cells with no treated units are allowed.  Uses
    ``E(Y_0 | X=1) = (E(Y_0) - p_0 E(Y | X=0)) / p_1``.
    """
    c = _check_c(c)
    bad = [cell.label for cell in pop.cells if cell.propensity >= 1.0]
    if bad:
        raise ValueError(f"ATT needs P(X=1 | W=w) < 1; violated in cells: {', '.join(bad)}")
    if pop.p1 <= 0.0:
        raise ValueError("ATT needs P(X=1) > 0")
    ey1 = _observed_arm_mean(pop, 1)
    ey0 = _observed_arm_mean(pop, 0)
    e0 = _potential_mean_bounds(pop, 0, c)
    lower = ey1 - (e0.upper - pop.p0 * ey0) / pop.p1
    upper = ey1 - (e0.lower - pop.p0 * ey0) / pop.p1
    return Interval(lower, upper)


def atu_bounds(pop: Population, c: float) -> Interval:
    """Bounds on ``E(Y_1 - Y_0 | X = 0)``, the mirror image of
    :func:`att_bounds` with c-dependence imposed on ``Y_1`` only."""
    c = _check_c(c)
    bad = [cell.label for cell in pop.cells if cell.propensity <= 0.0]
    if bad:
        raise ValueError(f"ATU needs P(X=1 | W=w) > 0; violated in cells: {', '.join(bad)}")
    if pop.p0 <= 0.0:
        raise ValueError("ATU needs P(X=0) > 0")
    ey1 = _observed_arm_mean(pop, 1)
    ey0 = _observed_arm_mean(pop, 0)
    e1 = _potential_mean_bounds(pop, 1, c)
    lower = (e1.lower - pop.p1 * ey1) / pop.p0 - ey0
    upper = (e1.upper - pop.p1 * ey1) / pop.p0 - ey0
    return Interval(lower, upper)


def effect_bounds(pop: Population, request: EffectRequest, c: float) -> Interval:
    """Dispatch ``request`` to the matching bound function."""
    kind = request.kind
    if kind == "ate":
        return ate_bounds(pop, c)
    if kind == "cate":
        return cate_bounds(pop.cell(request.cell), c)
    if kind == "qte":
        return qte_bounds(pop, c, request.tau)
    if kind == "cqte":
        return cqte_bounds(pop.cell(request.cell), c, request.tau)
    if kind == "att":
        return att_bounds(pop, c)
    if kind == "atu":
        return atu_bounds(pop, c)
    return binary_ate_bounds(pop, c)
