"""Evaluation metrics: reconstruction error, subspace distance, P/R/F1."""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyInlierSet, LengthMismatch


def relative_reconstruction_error(X_recon, X0, inlier_rows):
    """``||X_recon - X0||_F / ||X0||_F`` restricted to ``inlier_rows``."""
    X_recon = np.asarray(X_recon, dtype=np.float64)
    X0 = np.asarray(X0, dtype=np.float64)
    if X_recon.shape != X0.shape:
        raise DimensionMismatch(f"shapes differ: {X_recon.shape} vs {X0.shape}")
    rows = np.asarray(inlier_rows)
    if rows.dtype == bool:
        rows = np.flatnonzero(rows)
    if rows.size == 0:
        raise EmptyInlierSet("no inlier rows to evaluate")
    denom = np.linalg.norm(X0[rows])
    return float(np.linalg.norm(X_recon[rows] - X0[rows]) / denom)


def _cos_sin(V1, V2):
    V1 = np.asarray(V1, dtype=np.float64)
    V2 = np.asarray(V2, dtype=np.float64)
    if V1.shape != V2.shape or V1.ndim != 2:
        raise DimensionMismatch(f"bases must have equal shapes, got {V1.shape} and {V2.shape}")
    C = V1.T @ V2
    cos = np.clip(np.linalg.svd(C, compute_uv=False), 0.0, 1.0)
    sin = np.clip(np.linalg.svd(V2 - V1 @ C, compute_uv=False), 0.0, 1.0)
    # both descending; the largest cosine pairs with the smallest sine
    return cos, sin[::-1]


def principal_angles(V1, V2):
    """Principal angles in ascending order, radians."""
    cos, sin = _cos_sin(V1, V2)
    return np.arctan2(sin, cos)


def subspace_distance(V1, V2):
    """Projector distance and largest principal angle between two bases.

    Returns ``(||V1 V1^T - V2 V2^T||_F, max_angle)``.  Cosines come from the
    singular values of ``V1^T V2`` and sines from those of
    ``V2 - V1 (V1^T V2)``, so small angles keep full relative precision.
    """
    cos, sin = _cos_sin(V1, V2)
    return float(np.sqrt(2.0) * np.linalg.norm(sin)), float(np.max(np.arctan2(sin, cos)))


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float
    precision_undefined: bool = False
    recall_undefined: bool = False
    f1_undefined: bool = False

    def __iter__(self):
        return iter((self.precision, self.recall, self.f1))

    def to_dict(self):
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "precision_undefined": self.precision_undefined,
            "recall_undefined": self.recall_undefined,
            "f1_undefined": self.f1_undefined,
        }


def precision_recall_f1(predicted, truth):
    """Precision, recall and F1 for binary labels (1 = positive).

    A metric whose denominator is zero is reported as 0 and flagged.
    """
    pred = np.asarray(predicted).astype(bool).ravel()
    true = np.asarray(truth).astype(bool).ravel()
    if pred.size != true.size:
        raise LengthMismatch(f"{pred.size} predictions vs {true.size} labels")
    tp = int(np.sum(pred & true))
    fp = int(np.sum(pred & ~true))
    fn = int(np.sum(~pred & true))
    p_undef = tp + fp == 0
    r_undef = tp + fn == 0
    precision = 0.0 if p_undef else tp / (tp + fp)
    recall = 0.0 if r_undef else tp / (tp + fn)
    f_undef = precision + recall == 0
    f1 = 0.0 if f_undef else 2 * precision * recall / (precision + recall)
    return PRF(precision, recall, f1, p_undef, r_undef, f_undef)
