"""Statistical helpers: streaming moment accumulators, corrected z-thresholds,
and log-log slope fits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as sps


@dataclass
class MomentAccumulator:
    """Mean / standard-error accumulation from independent replica values.

    Feed one array per replica (a per-mode moment estimate); replicas are iid
    by construction, so the standard error of the mean over replicas is the
    honest batch-means error even when each value already averages correlated
    reporting nodes.
    """

    sum1: np.ndarray | float = 0.0
    sum2: np.ndarray | float = 0.0
    count: int = 0

    def add(self, value: np.ndarray) -> None:
        self.sum1 = self.sum1 + value
        self.sum2 = self.sum2 + value * value
        self.count += 1

    def merge(self, other: "MomentAccumulator") -> None:
        self.sum1 = self.sum1 + other.sum1
        self.sum2 = self.sum2 + other.sum2
        self.count += other.count

    def mean(self) -> np.ndarray:
        if self.count == 0:
            raise ValueError("empty accumulator")
        return self.sum1 / self.count

    def stderr(self) -> np.ndarray:
        if self.count < 2:
            raise ValueError("need >= 2 replicas for a standard error")
        var = (self.sum2 - self.sum1**2 / self.count) / (self.count - 1)
        return np.sqrt(np.maximum(var, 0.0) / self.count)


def corrected_z_threshold(n_tests: int, base_z: float = 3.0,
                          count: int | None = None) -> float:
    """Per-test |z| threshold so that n_tests jointly keep the base-z level.

    Bonferroni on the two-sided tail of the base threshold; with a finite
    replica count the normal quantile is replaced by Student's t.
    """
    if n_tests < 1:
        raise ValueError("n_tests must be >= 1")
    tail = sps.norm.sf(base_z) / n_tests
    if count is not None and count < 200:
        return float(sps.t.isf(tail, df=count - 1))
    return float(sps.norm.isf(tail))


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    stderr: float
    n_points: int


def loglog_slope(x: np.ndarray, y: np.ndarray) -> SlopeFit:
    """Ordinary least squares of log(y) on log(x); requires positive data."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    keep = (x > 0) & (y > 0)
    lx, ly = np.log(x[keep]), np.log(y[keep])
    if lx.size < 3:
        raise ValueError("need at least 3 positive points for a slope fit")
    res = sps.linregress(lx, ly)
    return SlopeFit(float(res.slope), float(res.intercept),
                    float(res.stderr), int(lx.size))


def max_over_min(values: np.ndarray) -> float:
    values = np.asarray(values, dtype=np.float64)
    if np.any(values <= 0):
        raise ValueError("ratio spread needs positive values")
    return float(np.max(values) / np.min(values))
