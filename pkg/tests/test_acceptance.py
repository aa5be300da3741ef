"""Acceptance suite: ten numbered criteria, one PASS/FAIL line each in the summary.

Run just this suite with ``pytest tests/test_acceptance.py -v``.
"""

import json
import math
import time

import numpy as np
import pytest

import oracles
from conftest import adjusted_rand, blobs, half_moons, two_partitions
from hybridreg import archive, cli, clustering as cl, hybrid as hy, mlp, quality
from hybridreg.dataset import SplitSpec, split, synthesize
from hybridreg.metrics import METRICS, build_report, regression_errors, weighted_average
from hybridreg.mlp import GridSpec, MlpModel

criterion = pytest.mark.criterion


def random_labels(r, n, k):
    """Labels in 0..k-1 with every cluster non-empty."""
    labels = np.concatenate([np.arange(k), r.integers(0, k, n - k)])
    return r.permutation(labels)


@criterion(1, "cluster indices match naive oracles within 1e-9")
def test_oracle_equivalence():
    start = time.perf_counter()
    r = np.random.default_rng(2024)
    for _ in range(50):
        k = int(r.integers(2, 5))
        n = int(r.integers(k + 2, 31))
        X = r.standard_normal((n, 4)) * r.uniform(0.5, 3.0)
        labels = random_labels(r, n, k)
        mean, per = quality.silhouette(X, labels)
        mean_ref, per_ref = oracles.silhouette(X, labels)
        assert abs(mean - mean_ref) <= 1e-9
        assert np.max(np.abs(per - np.asarray(per_ref))) <= 1e-9
        ch, ch_ref = quality.calinski_harabasz(X, labels), oracles.calinski_harabasz(X, labels)
        assert abs(ch - ch_ref) <= 1e-9 * max(1.0, abs(ch_ref))
        assert abs(quality.davies_bouldin(X, labels) - oracles.davies_bouldin(X, labels)) <= 1e-9
    assert time.perf_counter() - start < 10


def brute_force_inertia(X):
    return min(sum(((X[lab == j] - X[lab == j].mean(axis=0)) ** 2).sum() for j in range(2))
               for lab in two_partitions(X.shape[0]))


@criterion(2, "k-means inertia equals the brute-force optimum for N <= 8, k = 2")
def test_kmeans_micro_optimality():
    start = time.perf_counter()
    r = np.random.default_rng(7)
    for i in range(30):
        n = int(r.integers(3, 9))
        X = r.standard_normal((n, int(r.integers(1, 5))))
        model, _ = cl.kmeans(X, 2, seed=i)
        assert abs(model.inertia - brute_force_inertia(X)) <= 1e-9
    assert time.perf_counter() - start < 5


@criterion(3, "EM log-likelihood is non-decreasing")
@pytest.mark.parametrize("run", range(20))
def test_em_monotone(run):
    r = np.random.default_rng(100 + run)
    k = run % 4 + 1
    X, _ = blobs(r, r.uniform(-4, 4, (k, 3)), 25, r.uniform(0.3, 1.5))
    model, _ = cl.gaussian_mixture(X, k, seed=run)
    h = np.array(model.loglik_history)
    assert h.size >= 1 and np.isfinite(h).all()
    assert np.all(np.diff(h) >= -1e-9)


def fd_gradient(model, X, y, h=1e-5):
    th = model.theta
    out = np.empty_like(th)
    for i in range(th.size):
        e = np.zeros_like(th)
        e[i] = h
        up = MlpModel.from_theta(th + e, model.n_features, model.n_hidden, model.activation)
        dn = MlpModel.from_theta(th - e, model.n_features, model.n_hidden, model.activation)
        out[i] = (mlp.loss(up, X, y) - mlp.loss(dn, X, y)) / (2 * h)
    return out


def rel_err(a, b):
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-8)


@criterion(4, "backprop matches central differences (tanh 1e-5, relu 1e-4)")
@pytest.mark.parametrize("activation,tol", [("tanh", 1e-5), ("relu", 1e-4)])
def test_gradient_correctness(activation, tol):
    for seed in range(20):
        r = np.random.default_rng(seed)
        H, F = int(r.integers(3, 15)), 4
        m = MlpModel.from_theta(r.standard_normal(H * F + 2 * H + 1), F, H, activation)
        n = int(r.integers(5, 40))
        X, y = r.standard_normal((n, F)), r.standard_normal(n)
        g = mlp.gradient(m, X, y)
        err = rel_err(mlp.pack(g["w1"], g["b1"], g["w2"], g["b2"]), fd_gradient(m, X, y))
        if activation == "relu":
            # skip parameters feeding a unit that sits on its kink for some sample
            near = (np.abs(X @ m.w1.T + m.b1) < 1e-6).any(axis=0)
            kink = mlp.pack(np.repeat(near[:, None], F, axis=1), near, np.zeros(H, bool), False)
            err = err[~kink.astype(bool)]
        assert err.max() < tol


@criterion(5, "L-BFGS fits y = 2 x0 + 0.5; SGD and Adam reduce loss")
@pytest.mark.parametrize("seed", range(5))
def test_trainer_sanity(seed):
    r = np.random.default_rng(seed)
    X = r.uniform(0, 1, (200, 4))
    y = 2 * X[:, 0] + 0.5
    _, rep = mlp.train(X, y, 12, "tanh", "lbfgs", seed=seed, max_iter=200)
    assert rep.final_train_mse < 1e-3 and rep.iterations <= 200
    for solver in ("sgd", "adam"):
        _, rep = mlp.train(X, y, 12, "tanh", solver, seed=seed, max_iter=100)
        assert rep.final_train_mse < rep.loss_history[0]


@criterion(6, "spectral separates disconnected blobs and beats k-means on moons")
def test_spectral_separation():
    r = np.random.default_rng(0)
    X, y = blobs(r, [[0, 0], [20, 0]], 40, 0.5)
    _, asg = cl.spectral(X, 2, seed=0)
    assert adjusted_rand(asg.labels, y) == 1.0
    wins = 0
    for seed in range(5):
        X, y = half_moons(np.random.default_rng(seed), 200)
        _, s = cl.spectral(X, 2, seed=seed, gamma=50.0)
        _, k = cl.kmeans(X, 2, seed=seed)
        wins += adjusted_rand(s.labels, y) > adjusted_rand(k.labels, y)
    assert wins >= 4


REGIME_GRID = GridSpec((12, 12), ("tanh",), ("lbfgs",), folds=5)


@criterion(7, "pipeline recovers 4 regimes and hybrid beats global on >= 8/10 seeds")
@pytest.mark.slow
def test_pipeline_regime_recovery(tmp_path):
    start = time.perf_counter()
    assert cli.main(["synth", "--n", "2000", "--out", str(tmp_path)]) == 0
    data = str(tmp_path / "synth.csv")
    assert cli.main(["scan", "--data", data, "--kind", "kmeans", "--k-min", "2", "--k-max", "8",
                     "--out", str(tmp_path)]) == 0
    scan = json.loads((tmp_path / "scan.json").read_text())["results"][0]
    assert scan["selected"]["silhouette"] == 4 and scan["best_k"] == 4
    assert cli.main(["train", "--data", data, "--kind", "kmeans", "--k", "4",
                     "--neurons-min", "12", "--neurons-max", "12", "--activations", "tanh",
                     "--solvers", "lbfgs", "--folds", "5", "--out", str(tmp_path)]) == 0
    model, _ = archive.load(tmp_path / "model.json")
    assert len(model.locals) == 4

    wins = 0
    for seed in range(10):
        d, _ = synthesize(2000, seed=seed)
        train, valid = split(d, SplitSpec(0.2, seed))
        local = hy.train_hybrid(train, "kmeans", 4, REGIME_GRID, seed=seed)
        glob = hy.train_hybrid(train, "kmeans", 1, REGIME_GRID, seed=seed)
        mse_local = hy.error_report(local, valid).value("MSE")
        mse_global = hy.error_report(glob, valid).value("MSE")
        wins += mse_local <= mse_global
    assert wins >= 8
    assert time.perf_counter() - start < 300


@criterion(8, "metric hand-checks and weighted-average identity")
def test_metric_hand_checks():
    v, _ = regression_errors([1.0, 2.0], [2.0, 4.0], mase_scale=1.0)
    expected = {"MAE": 1.5, "MSE": 2.5, "MAPE": 1.0, "SMAPE": 2 / 3,
                "LMLS": 0.5 * (math.log(1.5) + math.log(3.0)), "NMSE": 5 / 9, "MASE": 1.5}
    for m, want in expected.items():
        assert abs(v[m] - want) <= 1e-9, m
    rep = build_report([1.0, 2.0], [2.0, 4.0], [0, 0], 1, mase_scales=[1.0])
    for m, want in expected.items():
        assert abs(rep.value(m, 0) - want) <= 1e-9, m

    r = np.random.default_rng(8)
    for _ in range(50):
        k = int(r.integers(1, 6))
        n = int(r.integers(k, 60))
        labels = random_labels(r, n, k)
        y = r.uniform(1, 10, n)
        rep = build_report(y, y + r.normal(0, 1, n), labels, k, mase_scales=r.uniform(0.5, 2, k))
        sizes = rep.cluster_sizes
        for i, m in enumerate(METRICS):
            want = (sizes * rep.per_cluster[:, i]).sum() / sizes.sum()
            assert abs(rep.weighted_average[i] - want) <= 1e-12 * max(1.0, abs(want)), m
        np.testing.assert_array_equal(weighted_average(rep.per_cluster, sizes),
                                      rep.weighted_average)


def columns(line):
    return [c for c in (p.strip() for p in line.split("  ")) if c]


@criterion(9, "scan, error and parameter tables have the published layout")
def test_format_reproduction(tmp_path):
    grid = ["--neurons-min", "4", "--neurons-max", "4", "--activations", "tanh",
            "--solvers", "lbfgs", "--folds", "3", "--max-iter", "60"]
    assert cli.main(["scan", "--synth-n", "400", "--k-max", "4", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "scan.txt").read_text().splitlines()
    assert columns(lines[0]) == ["Clustering", "Best number of clusters", "Silhouette",
                                 "Calinski-Harabasz", "Davies-Bouldin"]
    assert [columns(l)[0] for l in lines[1:5]] == ["K-Means", "Gaussian Mixture",
                                                    "Agglomerative Clustering",
                                                    "Spectral Clustering"]
    assert all(len(columns(l)) == 5 for l in lines[1:5])

    for kind in ("kmeans", "gaussian_mixture", "agglomerative", "spectral"):
        out = tmp_path / kind
        assert cli.main(["train", "--synth-n", "400", "--kind", kind, "--k", "3",
                         "--out", str(out), *grid]) == 0
        text = (out / f"errors_{kind}.txt").read_text().splitlines()
        assert columns(text[1]) == ["Cluster", "1", "2", "3", "Weighted average"]
        body = [columns(l) for l in text[2:8]]
        assert [row[0] for row in body] == ["MSE", "MAE", "LMLS", "MAPE", "MASE", "SMAPE"]
        assert all(len(row) == 5 for row in body)
        params = (out / f"params_{kind}.txt").read_text().splitlines()
        assert columns(params[1]) == ["Grid Parameter / Cluster", "1", "2", "3"]
        assert [columns(l)[0] for l in params[2:]] == ["Number of neurons",
                                                       "Activation function", "Solver"]


@criterion(10, "identical runs give identical reports; archives predict bit-exactly")
def test_determinism_and_persistence(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    common = ["--synth-n", "400", "--seed", "5", "--neurons-min", "4", "--neurons-max", "5",
              "--activations", "tanh,relu", "--solvers", "lbfgs", "--folds", "3",
              "--max-iter", "60"]
    for run in ("a", "b"):
        out = str(tmp_path / run)
        assert cli.main(["scan", "--synth-n", "400", "--seed", "5", "--k-max", "4",
                         "--out", out]) == 0
        assert cli.main(["train", "--kind", "gaussian_mixture", "--k", "3", "--out", out,
                         *common]) == 0
        assert cli.main(["compare", "--k", "3", "--out", out, *common]) == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert files == sorted(p.name for p in (tmp_path / "b").iterdir())
    assert {"scan.txt", "errors_gaussian_mixture.json", "model.json", "compare.txt"} <= set(files)
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name

    d, _ = synthesize(600, seed=9)
    train, _ = split(d, SplitSpec(0.2, 9))
    probe = np.random.default_rng(9).uniform(d.features.min(axis=0), d.features.max(axis=0),
                                             (100, d.features.shape[1]))
    grid = GridSpec((4, 4), ("tanh",), ("lbfgs",), folds=3, max_iter=60)
    for kind in ("kmeans", "gaussian_mixture", "agglomerative", "spectral"):
        model = hy.train_hybrid(train, kind, 3, grid, seed=9)
        path = tmp_path / f"{kind}.json"
        archive.save(model, path)
        loaded, _ = archive.load(path)
        assert hy.predict(loaded, probe).tobytes() == hy.predict(model, probe).tobytes(), kind
