"""Seeded synthetic data generators."""

from dataclasses import dataclass

import numpy as np

from . import _rng
from .errors import InvalidInputs, InvalidRank

OUTLIER_HALF_WIDTH = 500.0


@dataclass(frozen=True)
class SyntheticDataset:
    X: np.ndarray
    X0: np.ndarray
    outlier_rows: np.ndarray
    true_rank: int
    seed: int

    @property
    def inlier_rows(self):
        mask = np.ones(self.X.shape[0], dtype=bool)
        mask[self.outlier_rows] = False
        return np.flatnonzero(mask)

    @property
    def labels(self):
        y = np.zeros(self.X.shape[0], dtype=np.int64)
        y[self.outlier_rows] = 1
        return y


def lowrank_with_outliers(n, p, r, seed=0, *, corrupt=True):
    """Rank-``r`` matrix ``A @ B`` with ``floor(sqrt(n))`` corrupted rows.

    ``A`` (n x r) and ``B`` (r x p) have i.i.d. standard normal entries.
    Corrupted rows, chosen uniformly without replacement, get i.i.d.
    ``Unif(-500, 500)`` noise added to every entry.  ``corrupt=False``
    returns the clean matrix with no outlier rows.
    """
    n, p, r = int(n), int(p), int(r)
    if not 1 <= r < min(n, p):
        raise InvalidRank(f"need 1 <= r < min(n, p), got r={r}, n={n}, p={p}")
    rng = _rng.make_rng(seed, _rng.LOWRANK)
    A = rng.standard_normal((n, r))
    B = rng.standard_normal((r, p))
    X0 = A @ B
    X = X0.copy()
    if corrupt:
        k = int(np.floor(np.sqrt(n)))
        rows = np.sort(rng.choice(n, size=k, replace=False))
        X[rows] += rng.uniform(-OUTLIER_HALF_WIDTH, OUTLIER_HALF_WIDTH, size=(k, p))
    else:
        rows = np.zeros(0, dtype=np.int64)
    return SyntheticDataset(X=X, X0=X0, outlier_rows=rows, true_rank=r, seed=int(seed))


def gaussian_inliers(n, p, variances, seed=0):
    """Rows i.i.d. ``N(0, diag(variances))``."""
    variances = np.asarray(variances, dtype=np.float64).ravel()
    if variances.size != p:
        raise InvalidInputs(f"expected {p} variances, got {variances.size}")
    if not np.all(variances > 0) or not np.all(np.isfinite(variances)):
        raise InvalidInputs("variances must be positive and finite")
    if n < 1:
        raise InvalidInputs(f"n must be >= 1, got {n}")
    rng = _rng.make_rng(seed, _rng.GAUSSIAN)
    return rng.standard_normal((int(n), int(p))) * np.sqrt(variances)
