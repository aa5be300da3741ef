import math
from itertools import combinations

import numpy as np
import pytest


def adjusted_rand(a, b):
    """Adjusted Rand index from the contingency table (Hubert and Arabie)."""
    a = np.asarray(a)
    b = np.asarray(b)
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)

    def pairs(v):
        return float(np.sum(v * (v - 1) / 2.0))

    sum_ij = pairs(table)
    sum_a = pairs(table.sum(axis=1))
    sum_b = pairs(table.sum(axis=0))
    total = len(a) * (len(a) - 1) / 2.0
    expected = sum_a * sum_b / total
    top = 0.5 * (sum_a + sum_b)
    if top == expected:
        return 1.0
    return (sum_ij - expected) / (top - expected)


def blobs(rng, centres, n_per, sigma):
    centres = np.asarray(centres, dtype=float)
    X = np.vstack([c + sigma * rng.standard_normal((n_per, centres.shape[1])) for c in centres])
    y = np.repeat(np.arange(len(centres)), n_per)
    return X, y


def half_moons(rng, n, noise=0.05):
    m = n // 2
    t1 = rng.uniform(0, math.pi, m)
    t2 = rng.uniform(0, math.pi, n - m)
    upper = np.column_stack([np.cos(t1), np.sin(t1)])
    lower = np.column_stack([1 - np.cos(t2), 0.5 - np.sin(t2)])
    X = np.vstack([upper, lower]) + noise * rng.standard_normal((n, 2))
    return X, np.repeat([0, 1], [m, n - m])


def two_partitions(n):
    """Every split of range(n) into two non-empty groups, as label vectors."""
    for r in range(1, n // 2 + 1):
        for group in combinations(range(n), r):
            labels = np.zeros(n, dtype=int)
            labels[list(group)] = 1
            yield labels


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance criteria: one PASS/FAIL line per criterion in the terminal summary
_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.skipped:
        return
    if rep.when == "call" or rep.failed:
        number, title = mark.args
        prev = _criteria.get(number, (title, True, 0.0))
        _criteria[number] = (title, prev[1] and rep.passed, prev[2] + rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, ok, secs = _criteria[number]
        terminalreporter.write_line(
            f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}  ({secs:.1f} s)")
