"""K-Means, Gaussian mixture (EM), agglomerative and spectral clustering.

Every fitter takes a scaled feature matrix and returns a ``ClusterModel``
(enough state to route unseen rows) together with a ``ClusterAssignment``
holding exactly ``k`` non-empty clusters.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from . import _kernels
from .errors import ClusteringError, NumericError
from .linalg import top_eigh

log = logging.getLogger(__name__)

KINDS = ("kmeans", "gaussian_mixture", "agglomerative", "spectral")
LINKAGES = ("ward", "complete", "average", "single")
GMM_REG = 1e-6


@dataclass(frozen=True)
class ClusterAssignment:
    labels: np.ndarray
    k: int
    sizes: np.ndarray = field(default=None)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1:
            raise ValueError("labels must be one-dimensional")
        if labels.size and (labels.min() < 0 or labels.max() >= self.k):
            raise ValueError(f"labels outside 0..{self.k - 1}")
        sizes = np.bincount(labels, minlength=self.k)
        if np.any(sizes == 0):
            empty = np.flatnonzero(sizes == 0).tolist()
            raise ClusteringError(f"clusters {empty} are empty; expected {self.k} non-empty")
        labels.setflags(write=False)
        sizes.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "sizes", sizes)

    @property
    def n(self):
        return self.labels.shape[0]


@dataclass(frozen=True)
class GmmParams:
    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray


@dataclass(frozen=True)
class ClusterModel:
    """Fitted clustering. ``centroids`` live in the space the model was fitted on."""

    kind: str
    k: int
    centroids: np.ndarray
    seed: int = 42
    gmm: Optional[GmmParams] = None
    linkage: Optional[str] = None
    gamma: Optional[float] = None
    inertia: Optional[float] = None
    loglik_history: tuple = ()

    @property
    def n_features(self):
        return self.centroids.shape[1]


def _as_matrix(data):
    X = np.ascontiguousarray(data, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("data must be a 2-D matrix")
    return X


# --------------------------------------------------------------------- k-means


def inertia(X, labels, centroids):
    """Sum of squared distances from each row to its assigned centroid."""
    diff = X - centroids[labels]
    return float(np.einsum("ij,ij->", diff, diff))


def kmeans_plusplus(X, k, rng):
    """D^2-weighted seeding."""
    n = X.shape[0]
    centres = np.empty((k, X.shape[1]))
    chosen = [int(rng.integers(n))]
    centres[0] = X[chosen[0]]
    d2 = ((X - centres[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            i = int(rng.choice(n, p=d2 / total))
        else:
            free = np.setdiff1d(np.arange(n), chosen)
            i = int(rng.choice(free))
        chosen.append(i)
        centres[j] = X[i]
        d2 = np.minimum(d2, ((X - centres[j]) ** 2).sum(axis=1))
    return centres


def _reseed_empty(X, labels, centroids, counts, d2):
    """Move each empty centroid onto the row farthest from its own centroid."""
    d2 = d2.copy()
    for c in np.flatnonzero(counts == 0):
        far = int(np.argmax(d2))
        centroids[c] = X[far]
        d2[far] = -1.0
    return centroids


def lloyd(X, init, max_iter=300, tol=1e-4):
    """Lloyd iterations from ``init``.

    Returns ``(centroids, labels, history)`` where ``history`` is the inertia
    after every assignment step. Raises ``ClusteringError`` if a cluster is
    still empty when iterations stop.
    """
    X = _as_matrix(X)
    C = np.array(init, dtype=np.float64)
    k = C.shape[0]
    labels, d2 = _kernels.assign_labels(X, C)
    history = [float(d2.sum())]
    for _ in range(max_iter):
        C_new, counts = _kernels.update_centroids(X, labels, k)
        if np.any(counts == 0):
            C_new = _reseed_empty(X, labels, C_new, counts, d2)
        shift = float(np.sqrt(((C_new - C) ** 2).sum()))
        C = C_new
        labels, d2 = _kernels.assign_labels(X, C)
        history.append(float(d2.sum()))
        if shift < tol:
            break
    counts = np.bincount(labels, minlength=k)
    if np.any(counts == 0):
        raise ClusteringError(f"k-means left {int((counts == 0).sum())} empty cluster(s)")
    return C, labels, history


def transfer_refine(X, labels, k, max_moves=None):
    """Single-point transfers (Hartigan's rule) applied after Lloyd.

    Repeatedly moves the one sample whose reassignment lowers the inertia
    most, using exact size-corrected gains, until no move helps. Inertia
    never increases and the result is also a Lloyd fixed point.
    """
    labels = np.array(labels, dtype=np.int64)
    n = X.shape[0]
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    sums = np.zeros((k, X.shape[1]))
    np.add.at(sums, labels, X)
    rows = np.arange(n)
    for _ in range(10 * n if max_moves is None else max_moves):
        C = sums / counts[:, None]
        d2 = ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)
        own = counts[labels]
        # removing a sample from a singleton would empty its cluster
        leave = np.full(n, -np.inf)
        movable = own > 1
        leave[movable] = own[movable] / (own[movable] - 1.0) * d2[rows[movable], labels[movable]]
        gain = counts / (counts + 1.0) * d2 - leave[:, None]
        gain[rows, labels] = np.inf
        i, j = np.unravel_index(np.argmin(gain), gain.shape)
        if not gain[i, j] < -1e-12 * max(1.0, leave[i]):
            break
        a = labels[i]
        sums[a] -= X[i]
        counts[a] -= 1
        sums[j] += X[i]
        counts[j] += 1
        labels[i] = j
    return labels


def kmeans(data, k, seed=42, max_iter=300, tol=1e-4, n_init=10):
    """Best of ``n_init`` k-means++ / Lloyd runs by inertia (earliest wins ties).

    Restarts use distinct seedings where the data allow it, and every Lloyd
    result is polished by :func:`transfer_refine`. Returned centroids are
    the member means of the returned labels.
    """
    X = _as_matrix(data)
    n = X.shape[0]
    if k < 1 or k > n:
        raise ValueError(f"k must lie in 1..{n}, got {k}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    rng = np.random.default_rng(seed)
    best = None
    seen = set()
    for _ in range(n_init):
        for _attempt in range(20):
            init = kmeans_plusplus(X, k, rng)
            key = tuple(sorted(map(bytes, init)))
            if key not in seen:
                break
        seen.add(key)
        try:
            _, labels, _ = lloyd(X, init, max_iter, tol)
        except ClusteringError:
            continue
        labels = transfer_refine(X, labels, k)
        C, _ = _kernels.update_centroids(X, labels, k)
        sse = inertia(X, labels, C)
        if best is None or sse < best[2]:
            best = (C, labels, sse)
    if best is None:
        raise ClusteringError(f"all {n_init} k-means restarts produced empty clusters")
    C, labels, sse = best
    model = ClusterModel("kmeans", k, C, seed=seed, inertia=sse)
    return model, ClusterAssignment(labels, k)


# ------------------------------------------------------------ Gaussian mixture


def _component_logpdf(X, means, covs):
    n, d = X.shape
    k = means.shape[0]
    out = np.empty((n, k))
    for j in range(k):
        try:
            L = np.linalg.cholesky(covs[j])
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"covariance of component {j} is not positive definite") from exc
        sol = np.linalg.solve(L, (X - means[j]).T)
        maha = (sol * sol).sum(axis=0)
        logdet = 2.0 * np.log(np.diag(L)).sum()
        out[:, j] = -0.5 * (d * np.log(2 * np.pi) + logdet + maha)
    return out


def _weighted_logpdf(X, g: GmmParams):
    with np.errstate(divide="ignore"):
        logw = np.log(g.weights)
    return _component_logpdf(X, g.means, g.covariances) + logw


def _m_step(X, resp):
    n, d = X.shape
    nk = resp.sum(axis=0) + 10 * np.finfo(float).eps
    means = (resp.T @ X) / nk[:, None]
    covs = np.empty((resp.shape[1], d, d))
    for j in range(resp.shape[1]):
        diff = X - means[j]
        covs[j] = (resp[:, j, None] * diff).T @ diff / nk[j]
        covs[j] = 0.5 * (covs[j] + covs[j].T)
        covs[j].flat[:: d + 1] += GMM_REG
    return GmmParams(nk / n, means, covs)


def _e_step(X, params):
    logp = _weighted_logpdf(X, params)
    norm = logsumexp(logp, axis=1)
    return np.exp(logp - norm[:, None]), float(norm.mean())


def em_fit(X, init_resp, max_iter=200, tol=1e-6):
    """EM for a full-covariance mixture started from responsibilities ``init_resp``.

    Returns ``(params, resp, history)`` with ``history`` the mean per-sample
    log-likelihood of every parameter set visited.
    """
    params = _m_step(X, init_resp)
    resp, ll = _e_step(X, params)
    history = [ll]
    for _ in range(max_iter):
        params = _m_step(X, resp)
        resp, ll = _e_step(X, params)
        history.append(ll)
        if ll - history[-2] < tol:
            break
    return params, resp, history


def gaussian_mixture(data, k, seed=42, max_iter=200, tol=1e-6):
    """Full-covariance Gaussian mixture fitted by EM from a k-means start."""
    X = _as_matrix(data)
    n = X.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if n <= k:
        raise ValueError(f"need more samples than components (N={n}, k={k})")
    _, start = kmeans(X, k, seed=seed)
    resp0 = np.zeros((n, k))
    resp0[np.arange(n), start.labels] = 1.0
    params, resp, history = em_fit(X, resp0, max_iter, tol)
    labels = np.argmax(resp, axis=1)
    model = ClusterModel("gaussian_mixture", k, params.means.copy(), seed=seed, gmm=params,
                         loglik_history=tuple(history))
    return model, ClusterAssignment(labels, k)


def responsibilities(model: ClusterModel, data):
    X = _as_matrix(data)
    logp = _weighted_logpdf(X, model.gmm)
    return np.exp(logp - logsumexp(logp, axis=1)[:, None])


# --------------------------------------------------------------- agglomerative


def agglomerative_tree(data, linkage="ward"):
    """Complete merge sequence ``(merges, heights)`` starting from singletons."""
    if linkage not in LINKAGES:
        raise ValueError(f"linkage must be one of {LINKAGES}, got {linkage!r}")
    X = _as_matrix(data)
    return _kernels.linkage_merges(X, _kernels.LINKAGE_CODES[linkage])


def cut_tree(merges, n, k):
    """Labels after the first ``n - k`` merges; clusters numbered by lowest member."""
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..{n}, got {k}")
    rep = np.arange(n)
    for a, b in merges[: n - k]:
        rep[rep == b] = a
    _, labels = np.unique(rep, return_inverse=True)
    return labels.astype(np.int64)


def _member_means(X, labels, k):
    C, _ = _kernels.update_centroids(X, labels, k)
    return C


def agglomerative(data, k, linkage="ward"):
    """Bottom-up merging of the closest pair under ``linkage`` until k clusters remain."""
    X = _as_matrix(data)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..{n}, got {k}")
    merges, _ = agglomerative_tree(X, linkage)
    labels = cut_tree(merges, n, k)
    model = ClusterModel("agglomerative", k, _member_means(X, labels, k), linkage=linkage)
    return model, ClusterAssignment(labels, k)


# -------------------------------------------------------------------- spectral


@dataclass(frozen=True)
class SimilarityGraph:
    affinity: np.ndarray
    degree: np.ndarray
    gamma: float


def build_similarity_graph(data, gamma=None) -> SimilarityGraph:
    """Dense Gaussian-kernel graph with a zero diagonal.

    ``gamma`` defaults to 1 / (2 sigma^2), sigma the median pairwise distance.
    """
    X = _as_matrix(data)
    n = X.shape[0]
    if n < 2:
        raise ValueError("a similarity graph needs at least two points")
    sq = (X * X).sum(axis=1)
    D2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * X @ X.T, 0.0)
    np.fill_diagonal(D2, 0.0)
    if gamma is None:
        iu = np.triu_indices(n, 1)
        sigma = float(np.median(np.sqrt(D2[iu])))
        if sigma == 0.0:
            raise NumericError("all points coincide; median distance is zero")
        gamma = 1.0 / (2.0 * sigma * sigma)
    elif gamma <= 0:
        raise ValueError("gamma must be positive")
    A = np.exp(-gamma * D2)
    np.fill_diagonal(A, 0.0)
    A = 0.5 * (A + A.T)
    return SimilarityGraph(A, A.sum(axis=1), float(gamma))


def spectral_embedding(graph: SimilarityGraph, k):
    """Row-normalised top-k eigenvectors of D^-1/2 A D^-1/2."""
    deg = graph.degree
    if np.any(deg <= 0):
        raise NumericError(f"{int((deg <= 0).sum())} isolated vertex(es) in the similarity graph")
    s = 1.0 / np.sqrt(deg)
    M = graph.affinity * s[:, None] * s[None, :]
    M = 0.5 * (M + M.T)
    _, V = top_eigh(M, k)
    norms = np.linalg.norm(V, axis=1, keepdims=True)
    return V / np.where(norms > 0, norms, 1.0)


def spectral(data, k, seed=42, gamma=None):
    """Normalised spectral clustering with k-means on the embedded rows."""
    X = _as_matrix(data)
    n = X.shape[0]
    if not 2 <= k <= n:
        raise ValueError(f"k must lie in 2..{n}, got {k}")
    graph = build_similarity_graph(X, gamma)
    U = spectral_embedding(graph, k)
    _, asg = kmeans(U, k, seed=seed)
    model = ClusterModel("spectral", k, _member_means(X, asg.labels, k), seed=seed,
                         gamma=graph.gamma)
    return model, asg


# ------------------------------------------------------------------- dispatch


def fit(kind, data, k, seed=42, **options):
    """Fit clustering ``kind`` by name; ``options`` go to the specific fitter."""
    if kind == "kmeans":
        return kmeans(data, k, seed=seed, **options)
    if kind == "gaussian_mixture":
        return gaussian_mixture(data, k, seed=seed, **options)
    if kind == "agglomerative":
        return agglomerative(data, k, **options)
    if kind == "spectral":
        return spectral(data, k, seed=seed, **options)
    raise ValueError(f"unknown clustering kind {kind!r}; expected one of {KINDS}")


def route_many(model: ClusterModel, data) -> np.ndarray:
    """Cluster id for each row: nearest centroid, or highest posterior for GMM."""
    X = _as_matrix(data)
    if X.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} features, got {X.shape[1]}")
    if X.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    if model.kind == "gaussian_mixture":
        return np.argmax(_weighted_logpdf(X, model.gmm), axis=1).astype(np.int64)
    labels, _ = _kernels.assign_labels(X, np.ascontiguousarray(model.centroids))
    return labels


def route(model: ClusterModel, x) -> int:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("route expects a single feature row")
    return int(route_many(model, x[None, :])[0])
