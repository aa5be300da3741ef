"""Deliberately naive double-loop versions of the cluster indices.

Written straight from the textbook definitions with Python loops and
``math`` only, so they share no code path with the package.
"""

import math


def _dist(a, b):
    return math.sqrt(sum((float(x) - float(y)) ** 2 for x, y in zip(a, b)))


def _groups(labels):
    out = {}
    for i, c in enumerate(labels):
        out.setdefault(int(c), []).append(i)
    return out


def _mean(rows):
    d = len(rows[0])
    return [sum(float(r[t]) for r in rows) / len(rows) for t in range(d)]


def silhouette(X, labels):
    groups = _groups(labels)
    scores = []
    for i, xi in enumerate(X):
        own = groups[int(labels[i])]
        if len(own) == 1:
            scores.append(0.0)
            continue
        a = sum(_dist(xi, X[j]) for j in own if j != i) / (len(own) - 1)
        b = math.inf
        for c, members in groups.items():
            if c == int(labels[i]):
                continue
            b = min(b, sum(_dist(xi, X[j]) for j in members) / len(members))
        scores.append(0.0 if max(a, b) == 0 else (b - a) / max(a, b))
    return sum(scores) / len(scores), scores


def calinski_harabasz(X, labels):
    groups = _groups(labels)
    n, k = len(X), len(groups)
    G = _mean(list(X))
    bgss = wgss = 0.0
    for members in groups.values():
        rows = [X[j] for j in members]
        Gj = _mean(rows)
        bgss += len(rows) * _dist(Gj, G) ** 2
        wgss += sum(_dist(r, Gj) ** 2 for r in rows)
    return (n - k) / (k - 1) * bgss / wgss


def davies_bouldin(X, labels):
    groups = _groups(labels)
    cents, deltas = [], []
    for members in groups.values():
        rows = [X[j] for j in members]
        Gj = _mean(rows)
        cents.append(Gj)
        deltas.append(sum(_dist(r, Gj) for r in rows) / len(rows))
    k = len(cents)
    total = 0.0
    for j in range(k):
        total += max((deltas[j] + deltas[m]) / _dist(cents[j], cents[m])
                     for m in range(k) if m != j)
    return total / k
