"""Robust centering by the feature-wise (lower) median."""

import numpy as np

from .errors import DimensionMismatch
from .linalg import as_data_matrix


def featurewise_median(X):
    """Column-wise median of ``X``.

    For an even number of rows the lower of the two middle order statistics
    is returned, so every coordinate is an actual data value and
    ``featurewise_median(center(X, featurewise_median(X)))`` is exactly zero.
    """
    X = as_data_matrix(X)
    k = (X.shape[0] - 1) // 2
    return np.partition(X, k, axis=0)[k].copy()


def center(X, mu):
    X = as_data_matrix(X)
    mu = np.asarray(mu, dtype=np.float64)
    if mu.shape != (X.shape[1],):
        raise DimensionMismatch(f"center has shape {mu.shape}, data has {X.shape[1]} features")
    return X - mu
