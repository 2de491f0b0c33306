"""
Leave-one-covariate-out propensity gaps, used as a benchmark for how large
``c`` could plausibly be.

For covariate ``k`` the gap at a cell ``w = (w_{-k}, w_k)`` is
``|P(X=1 | W=w) - P(X=1 | W_{-k}=w_{-k})|``.  ``cbar_k`` is its largest value
over supported cells; ``delta_quantiles`` summarises its distribution under
the cell weights.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

__all__ = ["PropensityTable", "cbar_k", "delta_quantiles", "propensity_gaps"]


@dataclass(frozen=True)
class PropensityTable:
    """Joint covariate cells with their treatment probabilities.

    Parameters
    ----------
    keys : sequence of tuples
        Covariate value vectors, all of the same length ``K``.
    propensities : sequence of float
        ``P(X=1 | W=w)`` per cell.
    weights : sequence of float
        ``P(W=w)`` per cell; normalised to sum to one.
    names : sequence of str, optional
        Covariate names, used only for reporting.
    """

    keys: tuple
    propensities: tuple
    weights: tuple
    names: tuple = ()

    def __post_init__(self):
        keys = tuple(tuple(k) if isinstance(k, (tuple, list)) else (k,) for k in self.keys)
        props = tuple(float(p) for p in self.propensities)
        wts = np.asarray(self.weights, dtype=float)
        if not keys:
            raise ValueError("propensity table is empty")
        if not (len(keys) == len(props) == wts.size):
            raise ValueError("keys, propensities and weights must have equal length")
        K = len(keys[0])
        if K == 0 or any(len(k) != K for k in keys):
            raise ValueError("all covariate keys must have the same positive length")
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate covariate keys")
        if any(not (0.0 <= p <= 1.0) for p in props):
            raise ValueError("propensities must lie in [0, 1]")
        if np.any(wts < 0) or wts.sum() <= 0:
            raise ValueError("weights must be nonnegative with positive total")
        names = tuple(self.names) if self.names else tuple(f"W{j + 1}" for j in range(K))
        if len(names) != K:
            raise ValueError("need one name per covariate")
        object.__setattr__(self, "keys", keys)
        object.__setattr__(self, "propensities", props)
        object.__setattr__(self, "weights", tuple((wts / wts.sum()).tolist()))
        object.__setattr__(self, "names", names)

    @property
    def n_covariates(self) -> int:
        return len(self.keys[0])

    @classmethod
    def from_population(cls, pop, names: Sequence[str] = ()) -> "PropensityTable":
        """Build a table from a fitted population whose cell labels are
        covariate tuples joined by ``|``."""
        keys = [tuple(cell.label.split("|")) for cell in pop.cells]
        return cls(tuple(keys), tuple(c.propensity for c in pop.cells),
                   tuple(c.weight for c in pop.cells), tuple(names))


def _resolve_index(table: PropensityTable, k) -> int:
    if isinstance(k, str):
        try:
            return table.names.index(k)
        except ValueError:
            raise KeyError(f"no covariate named {k!r}") from None
    k = int(k)
    if not (0 <= k < table.n_covariates):
        raise IndexError(f"covariate index {k} out of range for K={table.n_covariates}")
    return k


def propensity_gaps(table: PropensityTable, k, min_cell_weight: float = 0.0):
    """Per-cell gaps and their weights for covariate ``k``.

    Cells with weight not exceeding ``min_cell_weight`` are dropped before
    anything is computed (default keeps every supported cell).  With a
    single covariate the comparison is against the unconditional treatment
    probability.
    """
    k = _resolve_index(table, k)
    rows = [(key, p, w) for key, p, w in zip(table.keys, table.propensities, table.weights)
            if w > min_cell_weight and w > 0.0]
    if not rows:
        raise ValueError("no cells left after applying the weight filter")
    num: dict[Hashable, float] = defaultdict(float)
    den: dict[Hashable, float] = defaultdict(float)
    for key, p, w in rows:
        rest = key[:k] + key[k + 1:]
        num[rest] += p * w
        den[rest] += w
    gaps = np.array([abs(p - num[key[:k] + key[k + 1:]] / den[key[:k] + key[k + 1:]])
                     for key, p, _ in rows])
    weights = np.array([w for _, _, w in rows])
    return gaps, weights / weights.sum()


def cbar_k(table: PropensityTable, k, min_cell_weight: float = 0.0) -> float:
    """Largest change in the treatment probability from adding covariate
    ``k`` to the other covariates."""
    gaps, _ = propensity_gaps(table, k, min_cell_weight)
    return float(gaps.max())


def delta_quantiles(table: PropensityTable, k, probs: Sequence[float],
                    min_cell_weight: float = 0.0) -> list[float]:
    """Weighted quantiles (left inverse) of the gap distribution for
    covariate ``k``.  ``probs=[1.0]`` reproduces :func:`cbar_k`."""
    probs = list(probs)
    if not probs:
        raise ValueError("probs must be non-empty")
    if any(not (0.0 <= q <= 1.0) for q in probs):
        raise ValueError("probs must lie in [0, 1]")
    gaps, weights = propensity_gaps(table, k, min_cell_weight)
    order = np.argsort(gaps, kind="stable")
    g = gaps[order]
    cum = np.cumsum(weights[order])
    out = []
    for q in probs:
        if q >= 1.0:
            out.append(float(g[-1]))
            continue
        # smallest gap whose cumulative weight reaches q
        idx = int(np.searchsorted(cum, q - 1e-12 * max(1.0, q), side="left"))
        out.append(float(g[min(idx, g.size - 1)]))
    return out


def calibration_report(table: PropensityTable, probs: Sequence[float] = (0.5, 0.75, 0.9),
                       min_cell_weight: float = 0.0) -> list[dict]:
    """One row per covariate with ``cbar`` and the requested gap quantiles."""
    rows = []
    for j, name in enumerate(table.names):
        qs = delta_quantiles(table, j, probs, min_cell_weight)
        row = {"covariate": name, "cbar": cbar_k(table, j, min_cell_weight)}
        for q, v in zip(probs, qs):
            row[f"q{int(round(100 * q))}"] = v
        rows.append(row)
    return rows

