"""Shared numeric utilities: min-max normalization and stable ranking."""

from __future__ import annotations

import logging

import numpy as np

logger = logging.getLogger(__name__)


def minmax_normalize(values) -> np.ndarray:
    """Scale a score vector to [0, 1] via (v - min) / (max - min).

    A constant vector maps to all 0.5 and logs a warning: every sample then
    carries equal risk, so any ranking derived from it is vacuous and the
    caller is expected to flag the degeneracy downstream.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("minmax_normalize expects a non-empty 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError("minmax_normalize expects finite values")
    lo = arr.min()
    hi = arr.max()
    if hi == lo:
        logger.warning("constant score vector of length %d normalized to all 0.5", arr.size)
        return np.full(arr.shape, 0.5)
    return (arr - lo) / (hi - lo)


def rank_ascending(scores) -> np.ndarray:
    """Indices that order `scores` ascending; ties keep original order."""
    arr = np.asarray(scores, dtype=float)
    if arr.ndim != 1:
        raise ValueError("rank_ascending expects a 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError("rank_ascending expects finite values")
    return np.argsort(arr, kind="stable")
