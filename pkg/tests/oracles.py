"""Independent reference computations used by several test modules."""
import math

import numpy as np
from scipy import integrate

from sigdetect import gof as G
from sigdetect import models as M


def _measure_below(intervals, t):
    """Lebesgue measure of (union of disjoint intervals) intersected with [0, t]."""
    return sum(max(0.0, min(hi, t) - lo) for lo, hi in intervals if lo < t)


def _inside(intervals, x):
    return any(lo <= x <= hi for lo, hi in intervals)


def allowed_sets(n, k0, k1, lower, lo_cut, hi_cut):
    """Per-rank allowed intervals for {S <= b} in uniform (D-transformed) space.

    Rank k in [k0, k1] is constrained only when its value lies in
    [lo_cut, hi_cut]; there it must be at least ``lower[k-1]``.
    """
    sets = []
    for k in range(1, n + 1):
        if not k0 <= k <= k1:
            sets.append([(0.0, 1.0)])
            continue
        cut = max(lower[k - 1], lo_cut)
        parts = [(0.0, lo_cut)]
        if cut < hi_cut:
            parts.append((cut, hi_cut))
        parts.append((hi_cut, 1.0))
        sets.append([(a, b) for a, b in parts if b > a])
    return sets


def simplex_prob(sets):
    """n! * volume of {0 < x_1 < ... < x_n < 1, x_k in sets[k]} for n <= 3 by nested quadrature."""
    n = len(sets)
    pts = sorted({p for s in sets for iv in s for p in iv if 0 < p < 1})
    opts = dict(epsabs=1e-13, epsrel=1e-12, limit=200)

    if n == 1:
        return _measure_below(sets[0], 1.0)

    def lvl2(t):
        # integral over x1 < x2 < t with x2 in sets[1]
        f = lambda x2: _measure_below(sets[0], x2) if _inside(sets[1], x2) else 0.0
        p = [q for q in pts if q < t]
        return integrate.quad(f, 0.0, t, points=p or None, **opts)[0] if t > 0 else 0.0

    if n == 2:
        return 2.0 * lvl2(1.0)
    if n == 3:
        f = lambda x3: lvl2(x3) if _inside(sets[2], x3) else 0.0
        return 6.0 * integrate.quad(f, 0.0, 1.0, points=pts or None, **opts)[0]
    raise ValueError("quadrature oracle supports n <= 3")


def simulate_stat(family, n, reps, seed, domain=None, draw=None):
    """Brute-force statistic samples straight from the definition, row by row."""
    rng = np.random.default_rng(seed)
    k0, k1, a0, a1 = (1, n, 0.0, 1.0) if domain is None else domain
    out = np.empty(reps)
    x = np.arange(1, n + 1) / n
    for r in range(reps):
        p = np.sort(rng.random(n) if draw is None else draw(rng, n))
        best = -math.inf
        for i in range(k0, k1 + 1):
            if a0 <= p[i - 1] <= a1:
                best = max(best, float(G.f_eval(family, n, x[i - 1], p[i - 1])))
        out[r] = best
    return out


def binom_se(p, reps):
    return math.sqrt(max(p * (1 - p), 1e-12) / reps)


def quad_cdf(fam, n, b, dom, h1=None, side="two-sided"):
    """P(S <= b) straight from the definition by quadrature (no boundary_u involved)."""
    dom = dom.resolve(n)
    D = (lambda v: np.asarray(v, float)) if h1 is None else (lambda v: M.transform_D(M.Normal(), h1, side, v))
    g = G.g_inverse(fam, n, np.arange(1, n + 1) / n, b)
    sets = allowed_sets(n, dom.k0, dom.k1, D(g), float(D(dom.alpha0)), float(D(dom.alpha1)))
    return simplex_prob(sets)
