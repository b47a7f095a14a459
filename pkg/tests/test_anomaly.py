import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mompca.anomaly import anomaly_scores, label_top_fraction, n_flagged
from mompca.core import FitConfig, MompcaModel, fit
from mompca.errors import DimensionMismatch, InvalidFraction
from mompca.metrics import precision_recall_f1


def separable_case(seed=0, n_in=950, n_out=50, p=20, r=3):
    rng = np.random.default_rng(seed)
    U = np.linalg.qr(rng.standard_normal((p, r)))[0]
    inliers = rng.standard_normal((n_in, r)) * [5.0, 3.0, 2.0] @ U.T + 0.05 * rng.standard_normal((n_in, p))
    off = rng.standard_normal((n_out, p))
    off -= off @ U @ U.T
    outliers = 10.0 * off / np.linalg.norm(off, axis=1, keepdims=True)
    X = np.vstack([inliers, outliers])
    truth = np.r_[np.zeros(n_in, int), np.ones(n_out, int)]
    perm = rng.permutation(n_in + n_out)
    return X[perm], truth[perm]


def model_for(V, mu):
    return MompcaModel(basis=V, center=mu, config=FitConfig(d=V.shape[1]))


class TestScores:
    def test_at_center_and_in_span(self):
        V = np.eye(3)[:, :2]
        mu = np.array([1.0, 2.0, 3.0])
        m = model_for(V, mu)
        s = anomaly_scores(m, np.vstack([mu, mu + [4.0, -1.0, 0.0]]))
        np.testing.assert_array_equal(s, [0.0, 0.0])

    def test_dense_oracle(self):
        rng = np.random.default_rng(0)
        V = np.linalg.qr(rng.standard_normal((6, 2)))[0]
        mu = rng.standard_normal(6)
        X = rng.standard_normal((50, 6)) * 3
        P = np.eye(6) - V @ V.T
        oracle = np.array([float((P @ (x - mu)) @ (P @ (x - mu))) for x in X])
        np.testing.assert_allclose(anomaly_scores(model_for(V, mu), X), oracle, atol=1e-8)

    def test_rotation_invariant(self):
        rng = np.random.default_rng(1)
        V = np.linalg.qr(rng.standard_normal((8, 3)))[0]
        R = np.linalg.qr(rng.standard_normal((3, 3)))[0]
        X = rng.standard_normal((40, 8))
        mu = np.zeros(8)
        a = anomaly_scores(model_for(V, mu), X)
        b = anomaly_scores(model_for(V @ R, mu), X)
        assert np.max(np.abs(a - b)) <= 1e-9

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            anomaly_scores(model_for(np.eye(3)[:, :1], np.zeros(3)), np.ones((2, 4)))


class TestLabels:
    def test_ranked(self):
        res = label_top_fraction(np.arange(10.0), 0.2)
        assert np.flatnonzero(res.labels).tolist() == [8, 9]
        assert res.threshold == 8.0

    def test_all_tied(self):
        res = label_top_fraction(np.ones(10), 0.2)
        assert np.flatnonzero(res.labels).tolist() == [8, 9]

    def test_partial_tie_prefers_higher_index(self):
        res = label_top_fraction(np.array([5.0, 1.0, 5.0, 9.0, 5.0]), 0.4)
        assert np.flatnonzero(res.labels).tolist() == [3, 4]

    def test_rounding_guard(self):
        assert n_flagged(100, 0.07) == 7
        assert n_flagged(10, 0.21) == 3

    @pytest.mark.parametrize("o", [0.0, 1.0, -0.1, 1.5])
    def test_invalid_fraction(self, o):
        with pytest.raises(InvalidFraction):
            label_top_fraction(np.arange(5.0), o)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.integers(0, 5).map(float), min_size=1, max_size=60),
           st.floats(0.001, 0.999))
    def test_invariants(self, scores, o):
        scores = np.array(scores)
        res = label_top_fraction(scores, o)
        k = math.ceil(o * len(scores) - 1e-9)
        assert res.labels.sum() == k
        flagged = res.labels == 1
        if k:
            assert np.all(scores[flagged] >= res.threshold)
            assert np.all(flagged[scores > res.threshold])
            assert res.threshold == np.sort(scores)[::-1][k - 1]

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(0, 5).map(float), min_size=2, max_size=60),
           st.floats(0.01, 0.98), st.floats(0.0, 0.5))
    def test_monotone_in_fraction(self, scores, o, extra):
        o2 = min(0.999, o + extra)
        a = label_top_fraction(scores, o).labels
        b = label_top_fraction(scores, o2).labels
        assert np.all(b[a == 1] == 1)


def test_separable_case_f1():
    X, truth = separable_case()
    model = fit(X, FitConfig(d=3, n_blocks=150, seed=0))
    res = label_top_fraction(anomaly_scores(model, X), 0.05)
    prf = precision_recall_f1(res.labels, truth)
    assert prf.f1 >= 0.95
