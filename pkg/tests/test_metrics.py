import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from hybridreg.metrics import METRICS, build_report, regression_errors, weighted_average


def test_hand_example():
    v, skipped = regression_errors([1.0, 2.0], [2.0, 4.0])
    assert v["MAE"] == pytest.approx(1.5, abs=1e-9)
    assert v["MSE"] == pytest.approx(2.5, abs=1e-9)
    assert v["MAPE"] == pytest.approx(1.0, abs=1e-9)          # 100 %
    assert v["SMAPE"] == pytest.approx(2 / 3, abs=1e-9)
    assert v["LMLS"] == pytest.approx(0.5 * (math.log(1.5) + math.log(3.0)), abs=1e-9)
    assert v["LMLS"] == pytest.approx(0.7520, abs=1e-4)
    assert v["NMSE"] == pytest.approx(0.5 * (1 + 4) / (3 * 1.5), abs=1e-9)
    assert v["NMSE"] == pytest.approx(0.5556, abs=1e-4)
    assert skipped == {"MAPE": 0, "SMAPE": 0, "NMSE": 0}


def test_perfect_predictions():
    y = np.array([10.0, 20.0, 30.0])
    v, _ = regression_errors(y, y, mase_scale=2.0)
    assert all(v[m] == 0.0 for m in METRICS)


def test_mase_uses_supplied_scale():
    v, _ = regression_errors([1.0, 2.0], [2.0, 4.0], mase_scale=0.5)
    assert v["MASE"] == 3.0
    assert math.isnan(regression_errors([1.0], [2.0])[0]["MASE"])


def test_zero_targets_are_skipped_and_counted():
    v, skipped = regression_errors([0.0, 2.0, 4.0], [1.0, 3.0, 4.0])
    assert skipped["MAPE"] == 1
    assert v["MAPE"] == pytest.approx(0.5 * (1 / 2 + 0))


def test_smape_denominator_floor():
    v, skipped = regression_errors([1.0, -1.0], [1.5, 1.0])
    assert skipped["SMAPE"] == 1
    assert v["SMAPE"] == pytest.approx(2 * 0.5 / 2.5)


def test_nmse_undefined_for_opposite_signs():
    v, skipped = regression_errors([-1.0, -2.0], [1.0, 2.0])
    assert math.isnan(v["NMSE"]) and skipped["NMSE"] == 2


def test_weighted_average_hand_example():
    assert weighted_average([[2.0], [6.0]], [3, 1])[0] == 3.0


def test_empty_cluster_is_reported_but_not_averaged():
    rep = build_report([1.0, 2.0, 3.0], [1.5, 2.0, 3.5], [0, 0, 2], 3)
    assert list(rep.cluster_sizes) == [2, 0, 1]
    assert all(math.isnan(x) for x in rep.per_cluster[1])
    assert rep.value("MSE") == pytest.approx((0.25 + 0 + 0.25) / 3)


def test_each_sample_counted_once(rng):
    clusters = rng.integers(0, 4, 50)
    y = rng.uniform(10, 50, 50)
    rep = build_report(y, y + rng.standard_normal(50), clusters, 4)
    assert rep.cluster_sizes.sum() == 50
    np.testing.assert_array_equal(rep.cluster_sizes, np.bincount(clusters, minlength=4))


positive = st.floats(1.0, 100.0)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), st.integers(0, 10**6))
def test_weighted_average_identity(k, seed):
    r = np.random.default_rng(seed)
    n = int(r.integers(k, 60))
    clusters = np.concatenate([np.arange(k), r.integers(0, k, n - k)])
    y = r.uniform(5, 60, n)
    y_hat = y + r.normal(0, 3, n)
    rep = build_report(y, y_hat, clusters, k, mase_scales=r.uniform(0.5, 2, k))
    s = rep.cluster_sizes.astype(float)
    expect = (s[:, None] * rep.per_cluster).sum(axis=0) / s.sum()
    np.testing.assert_allclose(rep.weighted_average, expect, rtol=0, atol=1e-12 * max(1, np.abs(expect).max()))


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, st.integers(1, 40), elements=positive),
       arrays(np.float64, st.integers(1, 40), elements=st.floats(-100, 100)))
def test_non_negative_and_jensen(y, noise):
    m = min(len(y), len(noise))
    y, y_hat = y[:m], y[:m] + noise[:m]
    v, _ = regression_errors(y, y_hat, mase_scale=1.0)
    for name, val in v.items():
        assert math.isnan(val) or val >= 0, name
    assert v["MAE"] ** 2 <= v["MSE"] * (1 + 1e-12) + 1e-300
