"""
Sharp bounds on the conditional cdf of a continuous ``U`` given a binary
``X`` when ``|P(X=1 | U=u) - P(X=1)| <= c`` for all ``u``.

Everything here is a function of ``F_U(u)`` rather than of ``u`` itself, so
the same code serves the conditional rank variables used downstream.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import Interval, _as_output, _check_probs

__all__ = [
    "CdepContext",
    "SelectionFunction",
    "lower_cdf_map",
    "upper_cdf_map",
    "generic_cdf_bounds",
    "extremal_selection",
    "cdf_from_selection",
    "mixture_witness_cdf",
]


def _check_pc(p: float, c: float) -> None:
    if not (0.0 < p <= 1.0):
        raise ValueError(f"arm probability must lie in (0, 1], got {p}")
    if not (0.0 <= c <= 1.0):
        raise ValueError(f"c must lie in [0, 1], got {c}")


def lower_cdf_map(F, p: float, c: float):
    """Lower bound on ``F_{U|X}(u|x)`` as a function of ``F = F_U(u)``.

    ``max{F - (c/p) min(F, 1-F), (F-1)/p + 1, 0}``.  For
    ``c >= max(p, 1-p)`` the first term never binds and the no-assumption
    form ``max{(F-1)/p + 1, 0}`` is returned directly.
    """
    _check_pc(p, c)
    arr = np.asarray(F, dtype=float)
    lta = np.maximum((arr - 1.0) / p + 1.0, 0.0)
    if c >= max(p, 1.0 - p):
        out = lta
    else:
        out = np.maximum(arr - (c / p) * np.minimum(arr, 1.0 - arr), lta)
    return _as_output(np.asarray(out), arr.ndim == 0)


def upper_cdf_map(F, p: float, c: float):
    """Upper bound on ``F_{U|X}(u|x)`` as a function of ``F = F_U(u)``.

    ``min{F + (c/p) min(F, 1-F), F/p, 1}``.
    """
    _check_pc(p, c)
    arr = np.asarray(F, dtype=float)
    lta = np.minimum(arr / p, 1.0)
    if c >= max(p, 1.0 - p):
        out = lta
    else:
        out = np.minimum(arr + (c / p) * np.minimum(arr, 1.0 - arr), lta)
    return _as_output(np.asarray(out), arr.ndim == 0)


@dataclass(frozen=True)
class CdepContext:
    """Arm probability ``p_x = P(X = x)`` and sensitivity parameter ``c``."""

    p_x: float
    c: float

    def __post_init__(self):
        if not (0.0 < self.p_x < 1.0):
            raise ValueError(f"p_x must lie in (0, 1), got {self.p_x}")
        if not (0.0 <= self.c <= 1.0):
            raise ValueError(f"c must lie in [0, 1], got {self.c}")

    @property
    def floor(self) -> float:
        return max(self.p_x - self.c, 0.0)

    @property
    def cap(self) -> float:
        return min(self.p_x + self.c, 1.0)

    def complement(self) -> "CdepContext":
        return CdepContext(1.0 - self.p_x, self.c)


@dataclass(frozen=True)
class SelectionFunction:
    """Two-level step function ``r -> P(X = x | R = r)`` on rank space.

    ``first`` holds on ``[0, kink]`` and ``second`` on ``(kink, 1]``.
    """

    first: float
    second: float
    kink: float

    def __post_init__(self):
        for v in (self.first, self.second):
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"selection probabilities must lie in [0, 1], got {v}")
        if not (0.0 <= self.kink <= 1.0):
            raise ValueError(f"kink must lie in [0, 1], got {self.kink}")

    @property
    def orientation(self) -> str:
        return "low-then-high" if self.first <= self.second else "high-then-low"

    @property
    def low(self) -> float:
        return min(self.first, self.second)

    @property
    def high(self) -> float:
        return max(self.first, self.second)

    def __call__(self, r):
        arr = np.asarray(r, dtype=float)
        out = np.where(arr <= self.kink, self.first, self.second)
        return _as_output(np.asarray(out, dtype=float), arr.ndim == 0)

    def integral(self, u: float = 1.0) -> float:
        """``int_0^u sel(r) dr``."""
        u = float(u)
        if u <= self.kink:
            return self.first * u
        return self.first * self.kink + self.second * (u - self.kink)

    def sup_deviation(self, p_x: float) -> float:
        """``sup_r |sel(r) - p_x|``; at most ``c`` for any admissible function."""
        return max(abs(self.first - p_x), abs(self.second - p_x))


def generic_cdf_bounds(ctx: CdepContext, F_U: float) -> Interval:
    """Sharp pointwise bounds on ``F_{U|X}(u | x)`` given ``F_U(u)``.

    With ``p_x = 0.75`` and ``c = 0.1``, ``F_U = 0.3`` gives ``[0.26, 0.34]``.
    """
    F = float(F_U)
    if not (0.0 <= F <= 1.0):
        raise ValueError(f"F_U must lie in [0, 1], got {F_U}")
    lo = lower_cdf_map(F, ctx.p_x, ctx.c)
    hi = upper_cdf_map(F, ctx.p_x, ctx.c)
    return Interval(lo, hi)


def extremal_selection(ctx: CdepContext, direction: str) -> SelectionFunction:
    """Selection function attaining the lower or upper cdf bound.

    The lower bound is attained by putting the smallest admissible
    treatment probability on low ranks and the largest on high ranks; the
    kink sits at ``min(c, 1-p)/(cap - floor)``.  The upper bound uses the
    mirror image, with kink at one minus that value.
    """
    if direction not in ("lower", "upper"):
        raise ValueError(f"direction must be 'lower' or 'upper', got {direction!r}")
    p = ctx.p_x
    if ctx.c == 0.0:
        return SelectionFunction(p, p, 0.5)
    floor, cap = ctx.floor, ctx.cap
    kink = min(ctx.c, 1.0 - p) / (cap - floor)
    if direction == "lower":
        return SelectionFunction(floor, cap, kink)
    return SelectionFunction(cap, floor, 1.0 - kink)


def cdf_from_selection(sel: SelectionFunction, ctx: CdepContext, u: float) -> float:
    """Conditional cdf ``(1/p_x) int_0^u sel(r) dr`` implied by a selection
    function when ``U`` is uniform on [0, 1]."""
    u = float(u)
    if not (0.0 <= u <= 1.0):
        raise ValueError(f"u must lie in [0, 1], got {u}")
    return sel.integral(u) / ctx.p_x


def mixture_witness_cdf(ctx: CdepContext, eps: float, u) -> tuple:
    """Jointly attainable pair of conditional cdfs at ``F_U = u``.

    Returns ``(eps*lower_x + (1-eps)*upper_x, (1-eps)*lower_{1-x} +
    eps*upper_{1-x})`` where the first coordinate is for the arm with
    probability ``ctx.p_x`` and the second for its complement.
    """
    if not (0.0 <= eps <= 1.0):
        raise ValueError(f"eps must lie in [0, 1], got {eps}")
    u = _check_probs(u, "u")
    p, c = ctx.p_x, ctx.c
    first = eps * lower_cdf_map(u, p, c) + (1.0 - eps) * upper_cdf_map(u, p, c)
    second = (1.0 - eps) * lower_cdf_map(u, 1.0 - p, c) + eps * upper_cdf_map(u, 1.0 - p, c)
    if np.ndim(u) == 0:
        return float(first), float(second)
    return first, second
