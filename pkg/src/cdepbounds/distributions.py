"""
Outcome distributions and the covariate-cell data model.

Every continuous outcome law used by the bound formulas must have a
continuous, strictly increasing cdf on a closed support interval.  The
classes below provide that in four flavours (piecewise-linear empirical,
truncated Gaussian, uniform, user supplied callables) behind one small
interface: ``cdf``, ``quantile`` (left inverse), ``partial_expectation``
and ``support``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.special import ndtr, ndtri

__all__ = [
    "Interval",
    "ScalarDistribution",
    "EmpiricalDistribution",
    "TruncatedGaussian",
    "Uniform",
    "AnalyticDistribution",
    "fit_empirical",
    "distribution_from_dict",
    "CovariateCell",
    "Population",
]

_INTERVAL_SLACK = 1e-10


def _as_output(values: np.ndarray, scalar: bool):
    if scalar:
        return float(values.reshape(-1)[0])
    return values


def _check_probs(tau, name="tau"):
    arr = np.asarray(tau, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {tau!r}")
    return arr


@dataclass(frozen=True)
class Interval:
    """Closed interval on the extended real line.

    ``lower`` may be ``-inf`` and ``upper`` may be ``+inf``.  A degenerate
    interval (``lower == upper``) is the point-identified case.
    """

    lower: float
    upper: float

    def __post_init__(self):
        lo, hi = float(self.lower), float(self.upper)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        if lo > hi + _INTERVAL_SLACK * (1.0 + min(abs(lo), abs(hi))):
            raise ValueError(f"lower endpoint {lo} exceeds upper endpoint {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def __iter__(self):
        yield self.lower
        yield self.upper

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def is_degenerate(self) -> bool:
        return self.lower == self.upper

    def contains(self, value: float, tol: float = 0.0) -> bool:
        return self.lower - tol <= value <= self.upper + tol

    def contains_interval(self, other: "Interval", tol: float = 0.0) -> bool:
        return self.lower - tol <= other.lower and other.upper <= self.upper + tol

    def __neg__(self) -> "Interval":
        return Interval(-self.upper, -self.lower)

    def as_tuple(self) -> tuple[float, float]:
        return (self.lower, self.upper)


class ScalarDistribution:
    """Base class for continuous outcome distributions.

    Subclasses implement ``_cdf``, ``_quantile`` and ``_primitive`` on numpy
    arrays; the public methods add argument checking and scalar handling.
    ``_primitive(tau)`` is the integral of the quantile function from 0 to
    ``tau`` (only differences of it are ever used).
    """

    kind: str = "abstract"

    @property
    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def cdf(self, y):
        """Evaluate the cdf.  Returns 0 at or below the support and 1 at or above
        its upper endpoint."""
        arr = np.asarray(y, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise ValueError("cdf argument must be finite")
        lo, hi = self.support
        out = np.clip(self._cdf(arr), 0.0, 1.0)
        out = np.where(arr <= lo, 0.0, out)
        out = np.where(arr >= hi, 1.0, out)
        return _as_output(np.asarray(out, dtype=float), arr.ndim == 0)

    def quantile(self, tau):
        """Left inverse of the cdf, with ``quantile(0)`` equal to the lower
        support endpoint and ``quantile(1)`` to the upper one."""
        arr = _check_probs(tau)
        lo, hi = self.support
        out = np.asarray(self._quantile(arr), dtype=float)
        out = np.where(arr <= 0.0, lo, out)
        out = np.where(arr >= 1.0, hi, out)
        return _as_output(out, arr.ndim == 0)

    def partial_expectation(self, tau_a: float, tau_b: float) -> float:
        """Integral of the quantile function over ``[tau_a, tau_b]``."""
        a, b = float(tau_a), float(tau_b)
        _check_probs(a, "tau_a")
        _check_probs(b, "tau_b")
        if a > b:
            raise ValueError(f"partial_expectation needs tau_a <= tau_b, got {a} > {b}")
        if a == b:
            return 0.0
        return float(self._partial(a, b))

    def _partial(self, a: float, b: float) -> float:
        return self._primitive(b) - self._primitive(a)

    def mean(self) -> float:
        return self.partial_expectation(0.0, 1.0)

    def to_dict(self) -> dict:
        raise TypeError(f"{type(self).__name__} cannot be serialized")

    # subclasses
    def _cdf(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _quantile(self, tau: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _primitive(self, tau: float) -> float:
        raise NotImplementedError


class EmpiricalDistribution(ScalarDistribution):
    """Continuous piecewise-linear cdf through a list of knots.

    Parameters
    ----------
    knots_y : array_like
        Strictly increasing outcome values.
    knots_p : array_like
        Strictly increasing cdf values at the knots, starting at 0 and ending
        at 1.
    """

    kind = "empirical"

    def __init__(self, knots_y: Sequence[float], knots_p: Sequence[float]):
        ys = np.asarray(knots_y, dtype=float)
        ps = np.asarray(knots_p, dtype=float)
        if ys.ndim != 1 or ys.shape != ps.shape or ys.size < 2:
            raise ValueError("knots must be two 1-d arrays of equal length >= 2")
        if not np.all(np.isfinite(ys)):
            raise ValueError("knot locations must be finite")
        if np.any(np.diff(ys) <= 0) or np.any(np.diff(ps) <= 0):
            raise ValueError("knots must be strictly increasing")
        if ps[0] != 0.0 or ps[-1] != 1.0:
            raise ValueError("cdf knots must start at 0 and end at 1")
        self.knots_y = ys
        self.knots_p = ps
        seg = np.diff(ps) * (ys[:-1] + ys[1:]) / 2.0
        self._cum = np.concatenate([[0.0], np.cumsum(seg)])

    @property
    def support(self):
        return float(self.knots_y[0]), float(self.knots_y[-1])

    def _cdf(self, y):
        return np.interp(y, self.knots_y, self.knots_p)

    def _quantile(self, tau):
        return np.interp(tau, self.knots_p, self.knots_y)

    def _primitive(self, tau):
        k = int(np.searchsorted(self.knots_p, tau, side="right")) - 1
        k = min(max(k, 0), len(self.knots_p) - 2)
        q = float(np.interp(tau, self.knots_p, self.knots_y))
        return self._cum[k] + (tau - self.knots_p[k]) * (self.knots_y[k] + q) / 2.0

    def to_dict(self):
        return {"kind": self.kind, "knots_y": self.knots_y.tolist(), "knots_p": self.knots_p.tolist()}

    def __repr__(self):
        lo, hi = self.support
        return f"EmpiricalDistribution(n_knots={self.knots_y.size}, support=[{lo:g}, {hi:g}])"


class TruncatedGaussian(ScalarDistribution):
    """Location-scale Gaussian truncated to ``[loc + a*scale, loc + b*scale]``.

    The quantile inverts the normal cdf in the nearer tail.  Partial expectations use
    the closed-form antiderivative ``loc*Phi(z) - scale*phi(z)``.
    """

    kind = "truncated-gaussian"

    def __init__(self, loc: float = 0.0, scale: float = 1.0, a: float = -4.0, b: float = 4.0):
        if not (scale > 0 and math.isfinite(scale)):
            raise ValueError(f"scale must be positive and finite, got {scale}")
        if not (a < b) or not (math.isfinite(a) and math.isfinite(b)):
            raise ValueError("truncation points must be finite with a < b")
        self.loc = float(loc)
        self.scale = float(scale)
        self.a = float(a)
        self.b = float(b)
        self._pa = float(ndtr(self.a))
        self._sb = float(ndtr(-self.b))
        self._mass = float(ndtr(self.b)) - self._pa

    @property
    def support(self):
        return self.loc + self.a * self.scale, self.loc + self.b * self.scale

    def _cdf(self, y):
        z = np.clip((y - self.loc) / self.scale, self.a, self.b)
        return (ndtr(z) - self._pa) / self._mass

    def _quantile(self, tau):
        tau = np.asarray(tau, dtype=float)
        # invert in whichever tail keeps the target probability small
        left = self._pa + tau * self._mass
        right = self._sb + (1.0 - tau) * self._mass
        with np.errstate(divide="ignore"):
            z = np.where(left <= 0.5, ndtri(np.minimum(left, 0.5)), -ndtri(np.minimum(right, 0.5)))
        z = np.clip(z, self.a, self.b)
        return self.loc + self.scale * z

    def _antiderivative(self, z):
        phi = math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
        return (self.loc * float(ndtr(z)) - self.scale * phi) / self._mass

    def _primitive(self, tau):
        z = (self.quantile(tau) - self.loc) / self.scale
        z = min(max(z, self.a), self.b)
        return self._antiderivative(z)

    def to_dict(self):
        return {"kind": self.kind, "loc": self.loc, "scale": self.scale, "a": self.a, "b": self.b}

    def __repr__(self):
        return f"TruncatedGaussian(loc={self.loc:g}, scale={self.scale:g}, a={self.a:g}, b={self.b:g})"


class Uniform(ScalarDistribution):
    kind = "uniform"

    def __init__(self, low: float = 0.0, high: float = 1.0):
        if not (math.isfinite(low) and math.isfinite(high) and low < high):
            raise ValueError("uniform needs finite low < high")
        self.low = float(low)
        self.high = float(high)

    @property
    def support(self):
        return self.low, self.high

    def _cdf(self, y):
        return (y - self.low) / (self.high - self.low)

    def _quantile(self, tau):
        return self.low + tau * (self.high - self.low)

    def _primitive(self, tau):
        return self.low * tau + 0.5 * (self.high - self.low) * tau * tau

    def to_dict(self):
        return {"kind": self.kind, "low": self.low, "high": self.high}

    def __repr__(self):
        return f"Uniform({self.low:g}, {self.high:g})"


class AnalyticDistribution(ScalarDistribution):
    """Distribution defined by user supplied cdf and quantile callables.

    The callables must accept numpy arrays.  The support may be unbounded.
    Partial expectations are computed by adaptive quadrature of the
    quantile function unless ``primitive`` (integral of the quantile from 0)
    is supplied.
    """

    kind = "user-analytic"

    def __init__(
        self,
        cdf: Callable[[np.ndarray], np.ndarray],
        quantile: Callable[[np.ndarray], np.ndarray],
        support: tuple[float, float],
        primitive: Optional[Callable[[float], float]] = None,
    ):
        lo, hi = float(support[0]), float(support[1])
        if not lo < hi:
            raise ValueError("support must satisfy lower < upper")
        self._cdf_fn = cdf
        self._q_fn = quantile
        self._support = (lo, hi)
        self._primitive_fn = primitive

    @property
    def support(self):
        return self._support

    def _cdf(self, y):
        return np.asarray(self._cdf_fn(y), dtype=float)

    def _quantile(self, tau):
        # keep the callable away from 0 and 1, the base class fills those in
        safe = np.clip(tau, 1e-300, 1.0 - 1e-16)
        return np.asarray(self._q_fn(safe), dtype=float)

    def _partial(self, a, b):
        if self._primitive_fn is not None:
            return float(self._primitive_fn(b) - self._primitive_fn(a))
        val, _ = integrate.quad(lambda s: float(self._q_fn(np.asarray(s))), a, b,
                                epsabs=1e-11, epsrel=1e-11, limit=400)
        return val


def fit_empirical(samples: Sequence[float]) -> EmpiricalDistribution:
    """Fit a continuous, strictly increasing piecewise-linear cdf to a sample.

    Interior order statistics get the midpoint plotting position
    ``(i - 0.5)/n``; the sample minimum and maximum are pinned to cdf values
    0 and 1 so the fitted cdf is continuous on ``[min, max]``.  Tied values
    share the average plotting position of their ranks.

    Raises
    ------
    ValueError
        If the sample has fewer than two distinct finite values.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0 or not np.all(np.isfinite(x)):
        raise ValueError("samples must be a non-empty collection of finite values")
    values, first, counts = np.unique(x, return_index=True, return_counts=True)
    if values.size < 2:
        raise ValueError("need at least 2 distinct values to fit a strictly increasing cdf")
    n = x.size
    # ranks first+1 .. first+count; average of (i - 0.5)/n over the tie group
    ps = (first + (counts + 1) / 2.0 - 0.5) / n
    ps[0] = 0.0
    ps[-1] = 1.0
    return EmpiricalDistribution(values, ps)


def distribution_from_dict(d: dict) -> ScalarDistribution:
    kind = d.get("kind")
    if kind == "empirical":
        return EmpiricalDistribution(d["knots_y"], d["knots_p"])
    if kind == "truncated-gaussian":
        return TruncatedGaussian(d["loc"], d["scale"], d.get("a", -4.0), d.get("b", 4.0))
    if kind == "uniform":
        return Uniform(d["low"], d["high"])
    raise ValueError(f"unknown or non-serializable distribution kind {kind!r}")


@dataclass(frozen=True)
class CovariateCell:
    """One discrete covariate value ``w``.

    Attributes
    ----------
    label : str
        Name of the cell, e.g. ``"w=1"``.
    weight : float
        ``P(W = w)``, in (0, 1].
    propensity : float
        ``P(X = 1 | W = w)``.  Values of exactly 0 or 1 are accepted so that
        treated/untreated-only parameters can be computed; operations that
        need an arm check its probability themselves.
    dist1, dist0 : ScalarDistribution, optional
        Outcome distribution given ``X = 1`` (resp. 0) and ``W = w``.
    success1, success0 : float, optional
        ``P(Y = 1 | X = x, W = w)`` for binary outcomes, in (0, 1).
    """

    label: str
    weight: float
    propensity: float
    dist1: Optional[ScalarDistribution] = None
    dist0: Optional[ScalarDistribution] = None
    success1: Optional[float] = None
    success0: Optional[float] = None

    def __post_init__(self):
        if not (0.0 < self.weight <= 1.0):
            raise ValueError(f"cell {self.label!r}: weight must be in (0, 1], got {self.weight}")
        if not (0.0 <= self.propensity <= 1.0):
            raise ValueError(f"cell {self.label!r}: propensity must be in [0, 1], got {self.propensity}")
        for name in ("success1", "success0"):
            v = getattr(self, name)
            if v is not None and not (0.0 < v < 1.0):
                raise ValueError(f"cell {self.label!r}: {name} must lie strictly inside (0, 1), got {v}")

    @property
    def is_binary(self) -> bool:
        return self.success1 is not None or self.success0 is not None

    def arm_prob(self, x: int) -> float:
        """``p_{x|w}``."""
        return self.propensity if x == 1 else 1.0 - self.propensity

    def arm(self, x: int) -> ScalarDistribution:
        if x not in (0, 1):
            raise ValueError(f"arm must be 0 or 1, got {x!r}")
        dist = self.dist1 if x == 1 else self.dist0
        if dist is None:
            raise ValueError(f"cell {self.label!r} has no outcome distribution for arm {x}")
        return dist

    def success(self, x: int) -> float:
        if x not in (0, 1):
            raise ValueError(f"arm must be 0 or 1, got {x!r}")
        v = self.success1 if x == 1 else self.success0
        if v is None:
            raise ValueError(f"cell {self.label!r} has no binary success probability for arm {x}")
        return v

    def to_dict(self) -> dict:
        out = {"label": self.label, "weight": self.weight, "propensity": self.propensity}
        for name in ("dist1", "dist0"):
            d = getattr(self, name)
            if d is not None:
                out[name] = d.to_dict()
        for name in ("success1", "success0"):
            v = getattr(self, name)
            if v is not None:
                out[name] = v
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "CovariateCell":
        kw = {k: d[k] for k in ("success1", "success0") if k in d}
        for name in ("dist1", "dist0"):
            if name in d:
                kw[name] = distribution_from_dict(d[name])
        return cls(label=str(d["label"]), weight=float(d["weight"]),
                   propensity=float(d["propensity"]), **kw)


@dataclass(frozen=True)
class Population:
    """Observable distribution of ``(Y, X, W)`` as a list of covariate cells."""

    cells: tuple[CovariateCell, ...]
    p1: float = field(init=False)

    def __post_init__(self):
        cells = tuple(self.cells)
        if not cells:
            raise ValueError("a population needs at least one cell")
        labels = [c.label for c in cells]
        if len(set(labels)) != len(labels):
            raise ValueError("cell labels must be unique")
        total = math.fsum(c.weight for c in cells)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"cell weights must sum to 1, got {total!r}")
        p1 = math.fsum(c.weight * c.propensity for c in cells)
        if not (0.0 < p1 < 1.0):
            raise ValueError(f"marginal treatment probability must lie in (0, 1), got {p1}")
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "p1", p1)

    @property
    def p0(self) -> float:
        return 1.0 - self.p1

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.cells])

    @property
    def is_binary(self) -> bool:
        return all(c.is_binary for c in self.cells)

    def cell(self, label: str) -> CovariateCell:
        for c in self.cells:
            if c.label == label:
                return c
        raise KeyError(f"no cell labelled {label!r}")

    def to_dict(self) -> dict:
        return {"cells": [c.to_dict() for c in self.cells]}

    @classmethod
    def from_dict(cls, d: dict) -> "Population":
        return cls(tuple(CovariateCell.from_dict(c) for c in d["cells"]))
