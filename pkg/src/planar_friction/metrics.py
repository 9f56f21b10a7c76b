"""Error statistics for comparing wrench traces."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def nrmse(candidate, oracle) -> np.ndarray:
    """Per-component RMSE divided by the largest absolute oracle value."""
    c = np.asarray(candidate, dtype=float)
    o = np.asarray(oracle, dtype=float)
    if c.shape != o.shape:
        raise ValueError("traces have different shapes")
    rmse = np.sqrt(np.mean((c - o) ** 2, axis=0))
    scale = np.max(np.abs(o), axis=0)
    return np.divide(rmse, scale, out=np.zeros_like(rmse), where=scale > 0)


@dataclass(frozen=True)
class BoxStats:
    lower_whisker: float
    q1: float
    median: float
    q3: float
    upper_whisker: float

    def as_tuple(self):
        return (self.lower_whisker, self.q1, self.median, self.q3, self.upper_whisker)


def box_stats(values) -> BoxStats:
    """Quartiles with Tukey whiskers: the most extreme samples within 1.5 IQR."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("no values")
    q1, med, q3 = (float(q) for q in np.percentile(v, [25, 50, 75]))
    iqr = q3 - q1
    lo = float(v[v >= q1 - 1.5 * iqr].min())
    hi = float(v[v <= q3 + 1.5 * iqr].max())
    return BoxStats(min(lo, q1), q1, med, q3, max(hi, q3))


def abs_error_stats(candidate, oracle) -> list[BoxStats]:
    err = np.abs(np.asarray(candidate, dtype=float) - np.asarray(oracle, dtype=float))
    return [box_stats(err[:, j]) for j in range(err.shape[1])]
