"""Weighted empirical quantiles.

Quantile definition used throughout: the smallest observed value whose
cumulative normalized weight reaches tau.  Under ties this is the lower
endpoint of the minimizing interval of the pinball loss.
"""

from __future__ import annotations

import numpy as np


def weighted_quantile(values, weights, tau: float) -> float:
    return float(weighted_quantile_grid(values, weights, [tau])[0])


def weighted_quantile_grid(values, weights, taus) -> np.ndarray:
    """Weighted quantiles at several levels in one sorting pass."""
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    taus = np.asarray(taus, dtype=float)
    if v.ndim != 1 or v.shape != w.shape:
        raise ValueError("values and weights must be 1-D and equally long")
    if v.size == 0:
        raise ValueError("no observations")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    total = w.sum()
    if total <= 0:
        raise ValueError("all weights are zero")
    if np.any((taus <= 0) | (taus >= 1)):
        raise ValueError("quantile levels must be strictly inside (0, 1)")
    order = np.lexsort((np.arange(v.size), v))
    cum = np.cumsum(w[order])
    idx = np.searchsorted(cum, taus * total, side="left")
    idx = np.minimum(idx, v.size - 1)
    return v[order][idx]
