"""Pure-numpy reference implementations of the hot kernels.

Every function here has a twin with the same signature in ``numba_impl``.
Results agree to floating-point rounding; merge orders and labels agree
exactly.
"""

import numpy as np

from .codes import AVERAGE, COMPLETE, IDENTITY, RELU, SINGLE, TANH, WARD

_CHUNK = 512


def assign_labels(X, C):
    """Nearest centroid per row (lowest index on ties) and its squared distance."""
    d2 = ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(d2, axis=1)
    return labels.astype(np.int64), d2[np.arange(X.shape[0]), labels]


def update_centroids(X, labels, k):
    counts = np.bincount(labels, minlength=k).astype(np.int64)
    sums = np.zeros((k, X.shape[1]))
    np.add.at(sums, labels, X)
    C = np.zeros_like(sums)
    nz = counts > 0
    C[nz] = sums[nz] / counts[nz, None]
    return C, counts


def cluster_distance_sums(X, labels, k):
    """S[i, c] = sum of Euclidean distances from row i to the members of cluster c."""
    n = X.shape[0]
    onehot = np.zeros((n, k))
    onehot[np.arange(n), labels] = 1.0
    S = np.empty((n, k))
    for start in range(0, n, _CHUNK):
        block = X[start:start + _CHUNK]
        D = np.sqrt(((block[:, None, :] - X[None, :, :]) ** 2).sum(axis=2))
        S[start:start + _CHUNK] = D @ onehot
    return S


def _initial_dissimilarity(X, method):
    D = ((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2)
    if method != WARD:
        D = np.sqrt(D)
    return D


def _lance_williams(D, size, a, b, method):
    """Dissimilarity of every cluster to the union of a and b (ward works on squares)."""
    na, nb = size[a], size[b]
    da, db = D[a], D[b]
    if method == WARD:
        nt = size
        return ((na + nt) * da + (nb + nt) * db - nt * D[a, b]) / (na + nb + nt)
    if method == COMPLETE:
        return np.maximum(da, db)
    if method == AVERAGE:
        return (na * da + nb * db) / (na + nb)
    if method == SINGLE:
        return np.minimum(da, db)
    raise ValueError(f"unknown linkage code {method}")


def _row_nearest(D, active, i):
    """First active j > i minimising D[i, j]; (-1, inf) when none exists."""
    row = np.where(active[i + 1:], D[i, i + 1:], np.inf)
    if row.size == 0:
        return -1, np.inf
    j = int(np.argmin(row))
    if not np.isfinite(row[j]):
        return -1, np.inf
    return i + 1 + j, row[j]


def linkage_merges(X, method):
    """Full agglomeration sequence.

    Returns ``merges`` (n-1, 2) with ``merges[s] = (a, b)``, a < b, meaning
    cluster represented by ``b`` is absorbed into the one represented by
    ``a`` at step s, and the merge ``heights``. Among equally close pairs the
    lexicographically smallest (a, b) is merged first.
    """
    n = X.shape[0]
    D = _initial_dissimilarity(X, method)
    active = np.ones(n, dtype=bool)
    size = np.ones(n)
    nn = np.full(n, -1, dtype=np.int64)
    nnd = np.full(n, np.inf)
    for i in range(n - 1):
        nn[i], nnd[i] = _row_nearest(D, active, i)

    merges = np.empty((max(n - 1, 0), 2), dtype=np.int64)
    heights = np.empty(max(n - 1, 0))
    for step in range(n - 1):
        cand = np.where(active, nnd, np.inf)
        a = int(np.argmin(cand))
        b = int(nn[a])
        merges[step] = a, b
        h = nnd[a]
        heights[step] = np.sqrt(h) if method == WARD else h

        new = _lance_williams(D, size, a, b, method)
        D[a, :] = new
        D[:, a] = new
        D[a, a] = 0.0
        size[a] += size[b]
        active[b] = False
        nn[b], nnd[b] = -1, np.inf

        stale = active & ((nn == a) | (nn == b))
        stale[a] = True
        for i in np.flatnonzero(stale):
            nn[i], nnd[i] = _row_nearest(D, active, i)
        lower = np.arange(a)
        lower = lower[active[:a] & ~stale[:a]]
        closer = (D[lower, a] < nnd[lower]) | ((D[lower, a] == nnd[lower]) & (a < nn[lower]))
        upd = lower[closer]
        nn[upd] = a
        nnd[upd] = D[upd, a]
    return merges, heights


def _activate(Z, act):
    if act == TANH:
        return np.tanh(Z)
    if act == RELU:
        return np.maximum(Z, 0.0)
    if act == IDENTITY:
        return Z.copy()
    raise ValueError(f"unknown activation code {act}")


def mlp_loss_grad(theta, X, y, n_hidden, act):
    """Batch MSE of a one-hidden-layer network and its gradient w.r.t. ``theta``.

    Layout of ``theta``: w1 (n_hidden x n_features, row-major), b1, w2, b2.
    """
    m, F = X.shape
    H = n_hidden
    W1 = theta[:H * F].reshape(H, F)
    b1 = theta[H * F:H * F + H]
    w2 = theta[H * F + H:H * F + 2 * H]
    b2 = theta[-1]

    Z = X @ W1.T + b1
    A = _activate(Z, act)
    r = A @ w2 + b2 - y
    loss = float(np.mean(r * r))

    g = 2.0 * r / m
    if act == TANH:
        dZ = np.outer(g, w2) * (1.0 - A * A)
    elif act == RELU:
        dZ = np.outer(g, w2) * (Z > 0.0)
    else:
        dZ = np.outer(g, w2)
    grad = np.empty_like(theta)
    grad[:H * F] = (dZ.T @ X).ravel()
    grad[H * F:H * F + H] = dZ.sum(axis=0)
    grad[H * F + H:H * F + 2 * H] = A.T @ g
    grad[-1] = g.sum()
    return loss, grad
