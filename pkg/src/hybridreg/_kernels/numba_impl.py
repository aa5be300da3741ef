"""numba-compiled kernels. Same contracts as ``numpy_impl``."""

import math

import numpy as np
from numba import njit

from .codes import AVERAGE, COMPLETE, RELU, SINGLE, TANH, WARD


@njit(cache=True)
def assign_labels(X, C):
    n, d = X.shape
    k = C.shape[0]
    labels = np.empty(n, dtype=np.int64)
    best = np.empty(n)
    for i in range(n):
        bj = 0
        bd = np.inf
        for j in range(k):
            s = 0.0
            for f in range(d):
                t = X[i, f] - C[j, f]
                s += t * t
            if s < bd:
                bd = s
                bj = j
        labels[i] = bj
        best[i] = bd
    return labels, best


@njit(cache=True)
def update_centroids(X, labels, k):
    n, d = X.shape
    C = np.zeros((k, d))
    counts = np.zeros(k, dtype=np.int64)
    for i in range(n):
        c = labels[i]
        counts[c] += 1
        for f in range(d):
            C[c, f] += X[i, f]
    for c in range(k):
        if counts[c] > 0:
            for f in range(d):
                C[c, f] /= counts[c]
    return C, counts


@njit(cache=True)
def cluster_distance_sums(X, labels, k):
    n, d = X.shape
    S = np.zeros((n, k))
    for i in range(n):
        for j in range(i + 1, n):
            s = 0.0
            for f in range(d):
                t = X[i, f] - X[j, f]
                s += t * t
            dist = math.sqrt(s)
            S[i, labels[j]] += dist
            S[j, labels[i]] += dist
    return S


@njit(cache=True)
def _row_nearest(D, active, i, n):
    bj = -1
    bd = np.inf
    for j in range(i + 1, n):
        if active[j] and D[i, j] < bd:
            bd = D[i, j]
            bj = j
    return bj, bd


@njit(cache=True)
def linkage_merges(X, method):
    n, d = X.shape
    D = np.empty((n, n))
    for i in range(n):
        D[i, i] = 0.0
        for j in range(i + 1, n):
            s = 0.0
            for f in range(d):
                t = X[i, f] - X[j, f]
                s += t * t
            if method != WARD:
                s = math.sqrt(s)
            D[i, j] = s
            D[j, i] = s

    active = np.ones(n, dtype=np.bool_)
    size = np.ones(n)
    nn = np.full(n, -1, dtype=np.int64)
    nnd = np.full(n, np.inf)
    for i in range(n - 1):
        nn[i], nnd[i] = _row_nearest(D, active, i, n)

    m = max(n - 1, 0)
    merges = np.empty((m, 2), dtype=np.int64)
    heights = np.empty(m)
    stale = np.zeros(n, dtype=np.bool_)
    for step in range(n - 1):
        a = -1
        h = np.inf
        for i in range(n):
            if active[i] and nnd[i] < h:
                h = nnd[i]
                a = i
        b = nn[a]
        merges[step, 0] = a
        merges[step, 1] = b
        heights[step] = math.sqrt(h) if method == WARD else h

        na = size[a]
        nb = size[b]
        dab = D[a, b]
        for t in range(n):
            if not active[t] or t == a or t == b:
                continue
            da = D[a, t]
            db = D[b, t]
            if method == WARD:
                nt = size[t]
                v = ((na + nt) * da + (nb + nt) * db - nt * dab) / (na + nb + nt)
            elif method == COMPLETE:
                v = max(da, db)
            elif method == AVERAGE:
                v = (na * da + nb * db) / (na + nb)
            else:
                v = min(da, db)
            D[a, t] = v
            D[t, a] = v
        size[a] = na + nb
        active[b] = False
        nn[b] = -1
        nnd[b] = np.inf

        for i in range(n):
            stale[i] = active[i] and (nn[i] == a or nn[i] == b or i == a)
        for i in range(n):
            if stale[i]:
                nn[i], nnd[i] = _row_nearest(D, active, i, n)
        for i in range(a):
            if active[i] and not stale[i]:
                v = D[i, a]
                if v < nnd[i] or (v == nnd[i] and a < nn[i]):
                    nn[i] = a
                    nnd[i] = v
    return merges, heights


@njit(cache=True)
def mlp_loss_grad(theta, X, y, n_hidden, act):
    m, F = X.shape
    H = n_hidden
    o_b1 = H * F
    o_w2 = o_b1 + H
    o_b2 = o_w2 + H
    grad = np.zeros_like(theta)
    z = np.empty(H)
    a = np.empty(H)
    loss = 0.0
    for i in range(m):
        out = theta[o_b2]
        for h in range(H):
            s = theta[o_b1 + h]
            for f in range(F):
                s += theta[h * F + f] * X[i, f]
            z[h] = s
            if act == TANH:
                a[h] = math.tanh(s)
            elif act == RELU:
                a[h] = s if s > 0.0 else 0.0
            else:
                a[h] = s
            out += theta[o_w2 + h] * a[h]
        r = out - y[i]
        loss += r * r
        g = 2.0 * r / m
        grad[o_b2] += g
        for h in range(H):
            grad[o_w2 + h] += a[h] * g
            dz = g * theta[o_w2 + h]
            if act == TANH:
                dz *= 1.0 - a[h] * a[h]
            elif act == RELU:
                if z[h] <= 0.0:
                    dz = 0.0
            grad[o_b1 + h] += dz
            for f in range(F):
                grad[h * F + f] += dz * X[i, f]
    return loss / m, grad
