"""Residual-based outlier detection on top of a fitted model."""

import math
from dataclasses import dataclass

import numpy as np

from .core import _check_features
from .errors import InvalidFraction
from .linalg import residual_value


@dataclass(frozen=True)
class AnomalyResult:
    scores: np.ndarray
    threshold: float
    labels: np.ndarray
    fraction: float


def anomaly_scores(model, X):
    """Squared distance of each row to the fitted affine subspace."""
    X = _check_features(model, X)
    return residual_value(model.basis, X - model.center)


def n_flagged(n, fraction):
    # ceil(o * N) with a guard so 0.07 * 100 = 7.000000000000001 counts as 7
    return min(n, max(0, math.ceil(fraction * n - 1e-9)))


def label_top_fraction(scores, fraction):
    """Flag exactly ``ceil(fraction * N)`` points with the largest scores.

    Ties at the threshold go to the higher original index first.  The
    threshold is the smallest flagged score.
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    if not 0 < fraction < 1:
        raise InvalidFraction(f"fraction must lie in (0, 1), got {fraction}")
    n = scores.size
    k = n_flagged(n, fraction)
    order = np.lexsort((np.arange(n), scores))  # ascending score, then index
    labels = np.zeros(n, dtype=np.int64)
    if k > 0:
        labels[order[n - k:]] = 1
        threshold = float(scores[order[n - k]])
    else:
        threshold = math.inf
    return AnomalyResult(scores=scores, threshold=threshold, labels=labels, fraction=float(fraction))
