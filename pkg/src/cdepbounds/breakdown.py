"""
Bound curves over a grid of ``c`` and breakdown points.

The identified set widens as ``c`` grows, so the set of ``c`` at which a sign
conclusion holds is an interval ``[0, c*)`` and ``c*`` can be found by
bisection.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .distributions import Interval, Population
from .effects import EffectRequest, effect_bounds

__all__ = ["BoundCurve", "bound_curve", "breakdown_c", "parse_grid", "thread_count"]

THREADS_ENV = "CDEP_THREADS"


def thread_count() -> int:
    """Worker count for grid sweeps, from ``CDEP_THREADS`` (default 1)."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


@dataclass(frozen=True)
class BoundCurve:
    """Identified sets for one parameter along a grid of ``c`` values."""

    kind: str
    grid: tuple
    intervals: tuple

    def __len__(self) -> int:
        return len(self.grid)

    @property
    def lower(self) -> np.ndarray:
        return np.array([iv.lower for iv in self.intervals])

    @property
    def upper(self) -> np.ndarray:
        return np.array([iv.upper for iv in self.intervals])

    def is_nested(self, tol: float = 1e-9) -> bool:
        """True when each interval contains its predecessor."""
        return all(b.contains_interval(a, tol) for a, b in zip(self.intervals, self.intervals[1:]))

    def rows(self) -> list[tuple[float, float, float]]:
        return [(c, iv.lower, iv.upper) for c, iv in zip(self.grid, self.intervals)]


def parse_grid(text: str) -> list[float]:
    """Parse ``start:stop:step`` (inclusive of ``stop``) or a comma list.

    >>> len(parse_grid("0:1:0.01"))
    101
    """
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must look like start:stop:step, got {text!r}")
        start, stop, step = (float(s) for s in parts)
        if step <= 0 or stop < start:
            raise ValueError(f"bad grid {text!r}")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(n)]
    return [float(s) for s in text.split(",") if s.strip()]


def _check_grid(grid: Sequence[float]) -> list[float]:
    g = [float(v) for v in grid]
    if not g:
        raise ValueError("grid is empty")
    if any(not (0.0 <= v <= 1.0) for v in g):
        raise ValueError("grid values must lie in [0, 1]")
    if any(b < a for a, b in zip(g, g[1:])):
        raise ValueError("grid must be sorted in increasing order")
    return g


def bound_curve(pop: Population, req: EffectRequest, grid: Sequence[float],
                threads: int | None = None) -> BoundCurve:
    """Evaluate the bounds of ``req`` at every grid point.

    Grid points are independent; ``threads`` (or ``CDEP_THREADS``) above one
    spreads them over a thread pool.
    """
    g = _check_grid(grid)
    n = thread_count() if threads is None else int(threads)
    if n > 1 and len(g) > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            ivs = list(pool.map(lambda c: effect_bounds(pop, req, c), g))
    else:
        ivs = [effect_bounds(pop, req, c) for c in g]
    return BoundCurve(req.kind, tuple(g), tuple(ivs))


def _holds(iv: Interval, sign: str) -> bool:
    return iv.lower > 0.0 if sign == "positive" else iv.upper < 0.0


def breakdown_c(pop: Population, req: EffectRequest, sign: str = "positive",
                tol: float = 1e-4, max_iter: int = 60) -> float:
    """Smallest ``c`` at which the identified set stops ruling out zero.

    For ``sign="positive"`` the conclusion is "lower bound > 0"; for
    ``"negative"`` it is "upper bound < 0".  Returns 1.0 when the conclusion
    survives at ``c = 1``.

    Raises
    ------
    ValueError
        If the conclusion already fails at ``c = 0`` or ``tol`` is not positive.
    """
    if sign not in ("positive", "negative"):
        raise ValueError(f"sign must be 'positive' or 'negative', got {sign!r}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not _holds(effect_bounds(pop, req, 0.0), sign):
        raise ValueError(f"{req.label} is not {sign} at c=0; no conclusion to break down")
    if _holds(effect_bounds(pop, req, 1.0), sign):
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if _holds(effect_bounds(pop, req, mid), sign):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
