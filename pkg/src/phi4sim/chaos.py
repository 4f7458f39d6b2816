"""Empirical moment-equivalence checks on fixed Wiener chaos.

For a scalar variable X in homogeneous chaos of order m, the moment ratio
(E|X|^p)^(1/p) / (E X^2)^(1/2) is bounded by (p-1)^(m/2), and the
Ornstein-Uhlenbeck semigroup acts as T_t X = exp(-m t) X, so the
hypercontractive inequality (E|T_t X|^q)^(1/q) <= (E|X|^p)^(1/p) with
q = 1 + (p-1) exp(2t) reduces to a computable scalar comparison.  Both are
verified here by seeded Monte Carlo with bootstrap confidence intervals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .gaussian import NoiseSeed, STREAM_SCALAR, hermite


@dataclass(frozen=True)
class ChaosVariable:
    """A scalar random variable of known (inhomogeneous) chaos order."""

    name: str
    order: int
    pure: bool  # True if supported on the single chaos H_order
    draw: Callable[[np.random.Generator, int], np.ndarray]


def gaussian_chaos(order: int) -> ChaosVariable:
    """H_order(G, 1) for a standard Gaussian G: a pure chaos-`order` variable."""
    if order < 1:
        raise ValueError("order must be >= 1")

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        return hermite(order, rng.standard_normal(size), 1.0)

    return ChaosVariable(f"hermite{order}(gaussian)", order, True, draw)


def shifted_gaussian(offset: float, scale: float) -> ChaosVariable:
    """offset + scale * G, an element of chaos order <= 1."""

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        return offset + scale * rng.standard_normal(size)

    return ChaosVariable(f"affine(gaussian,{offset},{scale})", 1, False, draw)


def _bootstrap_ci(values: np.ndarray, stat: Callable[[np.ndarray], float],
                  rng: np.random.Generator, confidence: float,
                  n_boot: int = 400) -> tuple[float, float]:
    n = values.size
    stats = np.empty(n_boot)
    for b in range(n_boot):
        idx = rng.integers(0, n, size=n)
        stats[b] = stat(values[idx])
    lo = (1.0 - confidence) / 2.0
    return (float(np.quantile(stats, lo)), float(np.quantile(stats, 1.0 - lo)))


@dataclass(frozen=True)
class NelsonReport:
    variable: str
    chaos_order: int
    p_moment: int
    replicas: int
    ratio: float
    ci_low: float
    ci_high: float
    bound: float
    violated: bool


def nelson_check(variable: ChaosVariable, p_moment: int, replicas: int,
                 seed: NoiseSeed = NoiseSeed(0), replica: int = 0,
                 confidence: float = 0.95) -> NelsonReport:
    """Empirical (E|X|^p)^(1/p) / (E X^2)^(1/2) against the chaos bound.

    Flags a violation only when the lower bootstrap confidence bound exceeds
    (p-1)^(order/2).
    """
    if p_moment not in (4, 6):
        raise ValueError("p_moment must be 4 or 6")
    if replicas < 10_000:
        raise ValueError("need at least 1e4 replicas for a stable ratio")
    rng = seed.generator(STREAM_SCALAR, replica, 0)
    x = variable.draw(rng, replicas)
    if np.var(x) == 0:
        raise ValueError("degenerate sampler: zero variance")

    def ratio_stat(v: np.ndarray) -> float:
        return float(np.mean(np.abs(v) ** p_moment) ** (1.0 / p_moment)
                     / np.sqrt(np.mean(v**2)))

    ratio = ratio_stat(x)
    boot_rng = seed.generator(STREAM_SCALAR, replica, 1)
    lo, hi = _bootstrap_ci(x, ratio_stat, boot_rng, confidence)
    bound = (p_moment - 1) ** (variable.order / 2.0)
    return NelsonReport(variable.name, variable.order, p_moment, replicas,
                        ratio, lo, hi, bound, lo > bound)


@dataclass(frozen=True)
class HypercontractivityReport:
    variable: str
    chaos_order: int
    t: float
    p: float
    q: float
    replicas: int
    lhs: float
    lhs_ci: tuple[float, float]
    rhs: float
    rhs_ci: tuple[float, float]
    violated: bool


def hypercontractivity_check(variable: ChaosVariable, t: float, p: float,
                             replicas: int, seed: NoiseSeed = NoiseSeed(0),
                             replica: int = 0,
                             confidence: float = 0.95) -> HypercontractivityReport:
    """Check (E|T_t X|^q)^(1/q) <= (E|X|^p)^(1/p) with q = 1 + (p-1) e^(2t).

    Requires a pure-chaos variable so that T_t X = exp(-order * t) X holds
    exactly and no semigroup simulation is needed.
    """
    if not variable.pure:
        raise ValueError("hypercontractivity check needs a pure-chaos variable")
    if t <= 0:
        raise ValueError("t must be positive")
    if p < 2:
        raise ValueError("p must be >= 2")
    q = 1.0 + (p - 1.0) * np.exp(2.0 * t)
    rng = seed.generator(STREAM_SCALAR, replica, 2)
    x = variable.draw(rng, replicas)
    if np.var(x) == 0:
        raise ValueError("degenerate sampler: zero variance")
    damp = np.exp(-variable.order * t)

    def lhs_stat(v: np.ndarray) -> float:
        return damp * float(np.mean(np.abs(v) ** q) ** (1.0 / q))

    def rhs_stat(v: np.ndarray) -> float:
        return float(np.mean(np.abs(v) ** p) ** (1.0 / p))

    lhs, rhs = lhs_stat(x), rhs_stat(x)
    boot_rng = seed.generator(STREAM_SCALAR, replica, 3)
    lhs_ci = _bootstrap_ci(x, lhs_stat, boot_rng, confidence)
    rhs_ci = _bootstrap_ci(x, rhs_stat, boot_rng, confidence)
    return HypercontractivityReport(variable.name, variable.order, t, p, float(q),
                                    replicas, lhs, lhs_ci, rhs, rhs_ci,
                                    violated=lhs_ci[0] > rhs_ci[1])


# Exact Gaussian-Hermite moment ratios, from the even moments of N(0,1);
# frozen reference values for the Monte Carlo checks above.
EXACT_NELSON_RATIOS = {
    # (chaos order, p): (E|H_m(G,1)|^p)^(1/p) / (E H_m(G,1)^2)^(1/2)
    (1, 4): 3.0 ** 0.25,
    (1, 6): 15.0 ** (1.0 / 6.0),
    (2, 4): (60.0 / 4.0) ** 0.25,            # E(G^2-1)^4 = 60, var = 2
    (2, 6): (6040.0 / 8.0) ** (1.0 / 6.0),   # E(G^2-1)^6 = 6040
    (3, 4): (3348.0 / 36.0) ** 0.25,         # E(G^3-3G)^4 = 3348, var = 6
    (3, 6): (11608920.0 / 216.0) ** (1.0 / 6.0),
}
