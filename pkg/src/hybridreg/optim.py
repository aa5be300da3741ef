"""L-BFGS with a strong-Wolfe line search.

``fun(x)`` must return ``(value, gradient)``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    n_iter: int
    n_evals: int
    converged: bool
    message: str
    history: list = field(default_factory=list)


def _cubic_min(a_lo, f_lo, d_lo, a_hi, f_hi, d_hi):
    """Minimiser of the cubic through two points with slopes; None if undefined."""
    if not (math.isfinite(f_hi) and math.isfinite(d_hi)) or a_lo == a_hi:
        return None
    d1 = d_lo + d_hi - 3.0 * (f_lo - f_hi) / (a_lo - a_hi)
    rad = d1 * d1 - d_lo * d_hi
    if rad < 0:
        return None
    d2 = math.copysign(math.sqrt(rad), a_hi - a_lo)
    den = d_hi - d_lo + 2.0 * d2
    if den == 0:
        return None
    return a_hi - (a_hi - a_lo) * (d_hi + d2 - d1) / den


def strong_wolfe(fun, x, f0, g0, d, alpha0=1.0, c1=1e-4, c2=0.9, max_evals=30):
    """Nocedal-Wright bracketing + zoom.

    Returns ``(alpha, f, g, n_evals)``; ``alpha`` is None when no step with
    sufficient decrease was found. A returned step always satisfies the
    sufficient-decrease condition, so ``f <= f0``.
    """
    dphi0 = float(g0 @ d)
    evals = 0

    def phi(a):
        nonlocal evals
        evals += 1
        f, g = fun(x + a * d)
        return float(f), g, float(g @ d) if math.isfinite(f) else math.nan

    def armijo(a, f):
        return math.isfinite(f) and f <= f0 + c1 * a * dphi0

    def zoom(lo, f_lo, g_lo, dl, hi, f_hi, dh):
        while evals < max_evals:
            width = hi - lo
            a = _cubic_min(lo, f_lo, dl, hi, f_hi, dh)
            left, right = min(lo, hi), max(lo, hi)
            margin = 0.1 * abs(width)
            if a is None or not (left + margin <= a <= right - margin):
                a = lo + 0.5 * width
            f, g, da = phi(a)
            if not armijo(a, f) or f >= f_lo:
                hi, f_hi, dh = a, f, da
            else:
                if abs(da) <= -c2 * dphi0:
                    return a, f, g
                if da * (hi - lo) >= 0:
                    hi, f_hi, dh = lo, f_lo, dl
                lo, f_lo, g_lo, dl = a, f, g, da
        if lo > 0:
            return lo, f_lo, g_lo
        return None, f0, g0

    a_prev, f_prev, g_prev, d_prev = 0.0, f0, g0, dphi0
    a = alpha0
    first = True
    while evals < max_evals:
        f, g, da = phi(a)
        if not armijo(a, f) or (not first and f >= f_prev):
            res = zoom(a_prev, f_prev, g_prev, d_prev, a, f, da)
            return (*res, evals)
        if abs(da) <= -c2 * dphi0:
            return a, f, g, evals
        if da >= 0:
            res = zoom(a, f, g, da, a_prev, f_prev, d_prev)
            return (*res, evals)
        a_prev, f_prev, g_prev, d_prev = a, f, g, da
        a *= 2.0
        first = False
    if a_prev > 0:
        return a_prev, f_prev, g_prev, evals
    return None, f0, g0, evals


def lbfgs(fun, x0, max_iter=500, memory=10, gtol=1e-6, ftol=1e-8, c1=1e-4, c2=0.9):
    """Minimise ``fun`` from ``x0``.

    Stops when the gradient 2-norm drops below ``gtol``, when an iteration
    lowers the objective by at most ``ftol`` relative to its value, or after
    ``max_iter`` iterations. The objective never increases between iterates.
    """
    x = np.array(x0, dtype=np.float64)
    f, g = fun(x)
    f = float(f)
    evals = 1
    history = [f]
    if not math.isfinite(f):
        return OptimizeResult(x, f, g, 0, evals, False, "non-finite initial objective", history)
    S, Y, rho = deque(maxlen=memory), deque(maxlen=memory), deque(maxlen=memory)
    message = "max_iter reached"
    converged = False
    it = 0
    while it < max_iter:
        if np.linalg.norm(g) < gtol:
            converged, message = True, "gradient norm below tolerance"
            break
        q = g.copy()
        alphas = []
        for s, y, r in zip(reversed(S), reversed(Y), reversed(rho)):
            a = r * (s @ q)
            alphas.append(a)
            q -= a * y
        if S:
            q *= (S[-1] @ Y[-1]) / (Y[-1] @ Y[-1])
        for (s, y, r), a in zip(zip(S, Y, rho), reversed(alphas)):
            b = r * (y @ q)
            q += (a - b) * s
        d = -q
        if not d @ g < 0:
            S.clear(), Y.clear(), rho.clear()
            d = -g
        step0 = 1.0 if S else min(1.0, 1.0 / np.linalg.norm(g))
        alpha, f_new, g_new, n = strong_wolfe(fun, x, f, g, d, step0, c1, c2)
        evals += n
        if alpha is None:
            if S:
                S.clear(), Y.clear(), rho.clear()
                continue
            message = "line search failed"
            break
        it += 1
        s = alpha * d
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-10 * float(y @ y):
            S.append(s)
            Y.append(y)
            rho.append(1.0 / sy)
        x = x + s
        f_old, f, g = f, float(f_new), g_new
        history.append(f)
        if f_old - f <= ftol * max(abs(f_old), abs(f)):
            converged, message = True, "objective change below tolerance"
            break
    return OptimizeResult(x, f, g, it, evals, converged, message, history)
