import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from hybridreg import quality
from hybridreg.clustering import ClusterAssignment
from hybridreg.dataset import fit_scaler, synthesize
from hybridreg.errors import NumericError
from hybridreg.quality import calinski_harabasz, davies_bouldin, scan_k, silhouette

ONE_D = np.array([[0.0], [1.0], [10.0], [11.0]])
ONE_D_LABELS = [0, 0, 1, 1]


def random_instance(seed):
    r = np.random.default_rng(seed)
    k = int(r.integers(2, 5))
    n = int(r.integers(k + 1, 31))
    labels = np.concatenate([np.arange(k), r.integers(0, k, n - k)])
    r.shuffle(labels)
    X = r.standard_normal((n, 4)) + 2.0 * labels[:, None]
    return X, labels


class TestSilhouette:
    def test_hand_value(self):
        X = np.array([[0, 0], [0, 1], [10, 10], [10, 11]], dtype=float)
        _, s = silhouette(X, [0, 0, 1, 1])
        b = (math.sqrt(200) + math.sqrt(221)) / 2
        assert b == pytest.approx(14.504, abs=1e-3)
        assert s[0] == pytest.approx((b - 1) / b, abs=1e-12)
        assert s[0] == pytest.approx(0.9311, abs=1e-4)

    def test_point_between_clusters_scores_zero(self):
        X = np.array([[0.0], [2.0], [4.0], [5.0]])
        _, s = silhouette(X, [0, 0, 1, 1])
        # point 2.0: mean distance 2 to its own cluster, 2.5 to the other
        assert s[1] == pytest.approx(0.2)
        _, s = silhouette(np.array([[0.0], [2.0], [4.0]]), [0, 0, 1])
        assert s[1] == 0.0

    def test_misassigned_point_is_negative(self):
        X = np.array([[0.0], [0.5], [10.0], [10.5], [9.8]])
        _, s = silhouette(X, [0, 0, 1, 1, 0])
        assert s[4] < 0

    def test_singletons_score_zero(self):
        _, s = silhouette(np.array([[0.0], [1.0], [5.0]]), [0, 0, 1])
        assert s[2] == 0.0

    def test_needs_two_clusters(self):
        with pytest.raises(ValueError):
            silhouette(np.zeros((3, 2)), [0, 0, 0])

    def test_mean_matches_per_sample(self, rng):
        X, labels = random_instance(3)
        mean, per = silhouette(X, labels)
        assert abs(mean - per.mean()) <= 1e-12
        assert np.all((per >= -1) & (per <= 1))

    def test_separated_blobs_exceed_point_nine(self, rng):
        # 1-D blobs with 10 sigma of empty space between their 3-sigma envelopes
        X = np.concatenate([rng.standard_normal(40), 16.0 + rng.standard_normal(40)])[:, None]
        mean, _ = silhouette(X, np.repeat([0, 1], 40))
        assert mean > 0.9


class TestCalinskiHarabasz:
    def test_hand_value(self):
        assert calinski_harabasz(ONE_D, ONE_D_LABELS) == pytest.approx(200.0, abs=1e-12)

    def test_duplicating_samples_increases_score(self):
        X2 = np.vstack([ONE_D, ONE_D])
        ch2 = calinski_harabasz(X2, ONE_D_LABELS * 2)
        assert ch2 == pytest.approx(oracles.calinski_harabasz(X2, ONE_D_LABELS * 2), abs=1e-9)
        assert ch2 == pytest.approx(600.0) and ch2 > 200.0

    def test_collapsed_clusters_give_infinity(self):
        X = np.array([[1.0, 1.0]] * 3 + [[4.0, 2.0]] * 3)
        assert calinski_harabasz(X, [0, 0, 0, 1, 1, 1]) == math.inf

    def test_identical_points_are_an_error(self):
        with pytest.raises(NumericError):
            calinski_harabasz(np.ones((4, 2)), [0, 0, 1, 1])


class TestDaviesBouldin:
    def test_hand_value(self):
        assert davies_bouldin(ONE_D, ONE_D_LABELS) == pytest.approx(0.1, abs=1e-12)

    def test_closer_clusters_are_worse(self):
        X = np.array([[0.0], [1.0], [2.0], [3.0]])
        assert davies_bouldin(X, ONE_D_LABELS) == pytest.approx(0.5, abs=1e-12)

    def test_collapsed_clusters_give_zero(self):
        X = np.array([[1.0, 1.0]] * 3 + [[4.0, 2.0]] * 3)
        assert davies_bouldin(X, [0, 0, 0, 1, 1, 1]) == 0.0

    def test_coincident_barycentres(self):
        X = np.array([[-1.0], [1.0], [-2.0], [2.0]])
        with pytest.raises(NumericError):
            davies_bouldin(X, [0, 0, 1, 1])


@pytest.mark.parametrize("seed", range(20))
def test_indices_match_naive_oracles(seed):
    X, labels = random_instance(seed)
    asg = ClusterAssignment(labels, int(labels.max()) + 1)
    mean, per = silhouette(X, asg)
    o_mean, o_per = oracles.silhouette(X, labels)
    assert abs(mean - o_mean) <= 1e-9
    np.testing.assert_allclose(per, o_per, atol=1e-9, rtol=0)
    assert abs(calinski_harabasz(X, asg) - oracles.calinski_harabasz(X, labels)) <= 1e-9 * max(
        1.0, oracles.calinski_harabasz(X, labels))
    assert abs(davies_bouldin(X, asg) - oracles.davies_bouldin(X, labels)) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.floats(-50, 50), st.floats(0.01, 100))
def test_invariances(seed, shift, scale):
    X, labels = random_instance(seed)
    r = np.random.default_rng(seed + 1)
    base = quality.evaluate(X, labels)

    perm = r.permutation(len(labels))
    relabel = r.permutation(int(labels.max()) + 1)
    variants = [
        (X[perm], labels[perm]),
        (X, relabel[labels]),
        (X + shift, labels),
        (X * scale, labels),
    ]
    for Xv, lv in variants:
        rep = quality.evaluate(Xv, lv)
        assert rep.silhouette == pytest.approx(base.silhouette, rel=1e-9, abs=1e-12)
        assert rep.calinski_harabasz == pytest.approx(base.calinski_harabasz, rel=1e-8)
        assert rep.davies_bouldin == pytest.approx(base.davies_bouldin, rel=1e-8)


class TestScan:
    def test_single_k(self, rng):
        res = scan_k(rng.random((20, 4)), "kmeans", (2, 2))
        assert len(res.entries) == 1 and res.best_k == 2

    @pytest.mark.parametrize("bad", [(1, 3), (3, 2), (2, 20)])
    def test_invalid_range(self, bad, rng):
        with pytest.raises(ValueError):
            scan_k(rng.random((20, 4)), "kmeans", bad)

    def test_failures_recorded_per_k(self, rng):
        res = scan_k(rng.random((20, 4)), "agglomerative", (2, 4), linkage="bogus")
        assert all(e.error for e in res.entries)
        assert res.best_k is None and res.best is None

    def test_planted_regimes_are_found(self):
        d, _ = synthesize(1000, seed=11)
        Z = fit_scaler(d).transform(d.features)
        res = scan_k(Z, "kmeans", (2, 8), seed=11)
        assert res.best_silhouette_k == 4
        assert res.best_calinski_harabasz_k == 4
        assert res.best_davies_bouldin_k == 4
        assert res.best_k == 4

    def test_silhouette_tie_broken_by_ch(self, monkeypatch):
        reports = {2: (0.5, 10.0), 3: (0.5, 30.0), 4: (0.4, 50.0)}

        def fake_evaluate(X, asg):
            s, ch = reports[asg.k]
            return quality.QualityReport(asg.k, s, ch, 1.0, np.zeros(len(X)))

        monkeypatch.setattr(quality, "evaluate", fake_evaluate)
        res = scan_k(np.random.default_rng(0).random((20, 4)), "kmeans", (2, 4))
        assert res.best_k == 3
        assert res.best_calinski_harabasz_k == 4
