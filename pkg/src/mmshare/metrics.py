"""Rate and coverage (empirical CCDF) computations."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def rate_of(sinr: float, bw_hz: float, n_users: int, half_duplex: float = 0.5) -> float:
    """Shannon rate of a user sharing ``bw_hz`` equally with ``n_users - 1``
    others: ``half_duplex * bw / N * log2(1 + SINR)``. A non-positive or
    NaN SINR (outage) yields 0."""
    if n_users < 1:
        raise ValueError("a served user implies a cell load of at least 1")
    if not sinr > 0:
        return 0.0
    return half_duplex * bw_hz / n_users * math.log2(1.0 + sinr)


def sinr_grid_db(lo: float = -20.0, hi: float = 60.0, step: float = 1.0) -> np.ndarray:
    return np.arange(lo, hi + step / 2, step)


def rate_grid_bps(lo: float = 1e5, hi: float = 1e10, n: int = 50) -> np.ndarray:
    return np.logspace(np.log10(lo), np.log10(hi), n)


@dataclass(frozen=True)
class CoverageCurve:
    """P[sample > threshold] per threshold. ``metric`` is "sinr" (thresholds
    in dB) or "rate" (bit/s)."""

    thresholds: np.ndarray
    coverage: np.ndarray
    sample_count: int
    metric: str = "sinr"
    label: str = ""

    def at(self, threshold: float) -> float:
        i = np.flatnonzero(np.isclose(self.thresholds, threshold))
        if not len(i):
            raise KeyError(f"threshold {threshold} not on the grid")
        return float(self.coverage[i[0]])


def coverage(samples, thresholds, metric: str = "sinr", label: str = "") -> CoverageCurve:
    """Empirical complementary CDF with strict inequality. ``-inf`` samples
    (outage) are below every threshold."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("coverage needs at least one sample")
    th = np.asarray(thresholds, dtype=float)
    xs = np.sort(x)
    # count of samples <= T, so strictly-above = n - that
    below = np.searchsorted(xs, th, side="right")
    cov = (x.size - below) / x.size
    return CoverageCurve(thresholds=th, coverage=cov, sample_count=int(x.size), metric=metric, label=label)


def sinr_coverage(results, thresholds=None, label: str = "") -> CoverageCurve:
    th = sinr_grid_db() if thresholds is None else thresholds
    return coverage([r.sinr_db for r in results], th, "sinr", label)


def rate_coverage(results, thresholds=None, label: str = "") -> CoverageCurve:
    th = rate_grid_bps() if thresholds is None else thresholds
    return coverage([r.rate_bps for r in results], th, "rate", label)
