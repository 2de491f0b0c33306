"""
Location-scale truncated-normal design with one binary covariate.

``Y_x | W=w`` is ``pi_X x + pi_W w + (gamma_X x + gamma_W w + sigma) Z`` with
``Z`` standard normal truncated to ``[-4, 4]``, and ``X`` is independent of
the potential outcomes given ``W``.  The average treatment effect is
``pi_X`` because the truncation is symmetric.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy import optimize, special

from .distributions import CovariateCell, Population, TruncatedGaussian

__all__ = [
    "DgpSpec",
    "dgp_population",
    "population_r2",
    "simulate_r2",
    "solve_sigma",
    "VARIANTS",
    "variant_spec",
    "TRUNCATION",
]

TRUNCATION = 4.0


@dataclass(frozen=True)
class DgpSpec:
    """Design parameters; defaults give the baseline design."""

    pi_x: float = 1.0
    pi_w: float = 1.0
    gamma_x: float = 0.1
    gamma_w: float = 0.1
    sigma: float = 0.965
    p_given_w1: float = 0.6
    p_given_w0: float = 0.4
    q: float = 0.5

    def __post_init__(self):
        for name in ("p_given_w1", "p_given_w0"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if not (0.0 <= self.q <= 1.0):
            raise ValueError(f"q must lie in [0, 1], got {self.q}")
        for x in (0, 1):
            for w in (0, 1):
                if self.scale(x, w) <= 0.0:
                    raise ValueError(f"outcome scale is not positive at (x={x}, w={w})")

    def loc(self, x: int, w: int) -> float:
        return self.pi_x * x + self.pi_w * w

    def scale(self, x: int, w: int) -> float:
        return self.gamma_x * x + self.gamma_w * w + self.sigma

    def propensity(self, w: int) -> float:
        return self.p_given_w1 if w == 1 else self.p_given_w0

    def weight(self, w: int) -> float:
        return self.q if w == 1 else 1.0 - self.q

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "DgpSpec":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown dgp fields: {', '.join(sorted(unknown))}")
        return cls(**{k: float(v) for k, v in d.items()})


def dgp_population(spec: DgpSpec) -> Population:
    """Two-cell population implied by ``spec``; a zero-weight cell is
    dropped."""
    cells = []
    for w in (0, 1):
        weight = spec.weight(w)
        if weight <= 0.0:
            continue
        arms = [TruncatedGaussian(spec.loc(x, w), spec.scale(x, w), -TRUNCATION, TRUNCATION)
                for x in (0, 1)]
        cells.append(CovariateCell(f"w={w}", weight, spec.propensity(w), arms[1], arms[0]))
    return Population(tuple(cells))


def _truncated_variance(t: float = TRUNCATION) -> float:
    mass = special.ndtr(t) - special.ndtr(-t)
    phi = math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)
    return 1.0 - 2.0 * t * phi / mass


def _joint(spec: DgpSpec):
    """``((x, w), P(X=x, W=w))`` over the four design cells."""
    out = []
    for w in (0, 1):
        for x in (0, 1):
            px = spec.propensity(w) if x == 1 else 1.0 - spec.propensity(w)
            out.append(((x, w), spec.weight(w) * px))
    return out


def population_r2(spec: DgpSpec) -> float:
    """Population R^2 of the regression of ``Y`` on ``(1, X, W)``.

    ``E(Y | X, W) = pi_X X + pi_W W`` is linear, so the R^2 is
    ``Var(pi_X X + pi_W W) / Var(Y)``.
    """
    joint = _joint(spec)
    m = sum(pr * spec.loc(x, w) for (x, w), pr in joint)
    explained = sum(pr * (spec.loc(x, w) - m) ** 2 for (x, w), pr in joint)
    v = _truncated_variance()
    noise = v * sum(pr * spec.scale(x, w) ** 2 for (x, w), pr in joint)
    return explained / (explained + noise)


def simulate_r2(spec: DgpSpec, n: int, seed: int = 0) -> float:
    """Monte Carlo R^2 from ``n`` draws and an OLS fit, as an independent
    check on :func:`population_r2`."""
    rng = np.random.default_rng(seed)
    w = (rng.random(n) < spec.q).astype(float)
    p = np.where(w == 1, spec.p_given_w1, spec.p_given_w0)
    x = (rng.random(n) < p).astype(float)
    lo, hi = special.ndtr(-TRUNCATION), special.ndtr(TRUNCATION)
    z = special.ndtri(lo + rng.random(n) * (hi - lo))
    y = spec.pi_x * x + spec.pi_w * w + (spec.gamma_x * x + spec.gamma_w * w + spec.sigma) * z
    design = np.column_stack([np.ones(n), x, w])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    return 1.0 - resid.var() / y.var()


def solve_sigma(spec: DgpSpec, target_r2: float) -> float:
    """``sigma`` at which :func:`population_r2` equals ``target_r2``."""
    if not (0.0 < target_r2 < 1.0):
        raise ValueError("target R^2 must lie in (0, 1)")
    # smallest sigma keeping every scale positive
    low = -min(0.0, spec.gamma_x, spec.gamma_w, spec.gamma_x + spec.gamma_w) + 1e-9

    def gap(s):
        return population_r2(replace(spec, sigma=s)) - target_r2

    hi = 1.0
    while gap(hi) > 0:
        hi *= 2.0
    if gap(low) < 0:
        raise ValueError(f"R^2 of {target_r2} is not attainable")
    return optimize.brentq(gap, low, hi, xtol=1e-14, rtol=1e-14)


# Frozen sigma values for the R^2 variants; regenerate with solve_sigma and
# cross-check with simulate_r2 (see tests/test_dgp.py).
SIGMA_R2_15 = 1.7432700059232948
SIGMA_R2_60 = 0.5280356223258138

VARIANTS = {
    "baseline": {},
    "p09": {"p_given_w1": 0.9, "p_given_w0": 0.1},
    "p05": {"p_given_w1": 0.5, "p_given_w0": 0.5},
    "r2_15": {"sigma": SIGMA_R2_15},
    "r2_60": {"sigma": SIGMA_R2_60},
}


def variant_spec(name: str) -> DgpSpec:
    """Named design: ``baseline``, ``p09``, ``p05``, ``r2_15`` or ``r2_60``."""
    try:
        return DgpSpec(**VARIANTS[name])
    except KeyError:
        raise KeyError(f"unknown dgp {name!r}; choose from {', '.join(VARIANTS)}") from None
