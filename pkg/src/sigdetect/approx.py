"""Approximate distributions from the gamma (Poisson process) embedding.

(n+1) U_(k) behaves like the k-th arrival Gamma_k of a unit-rate Poisson
process, so P(S <= b) ~ P(Gamma_k > d_k for all k) with d_k = (n+1) u_k.
That probability is computed exactly by the same backward recursion as the
uniform case, in closed form for a linear boundary, and as a Poisson sum for
a close-to-linear boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _recursion as R
from .exact import BoundaryVector, DistResult, _drive, boundary_u
from .gof import HC2004, GofFamily, SupDomain, g_inverse
from .models import PvalueSide, transform_D
from .special import h, log_factorial_table, poisson_pmf


class ConditionError(ValueError):
    """An approximation's validity conditions fail on the evaluation grid."""


# ---- gamma recursion ------------------------------------------------------------

def cdf_gamma_approx(u, n=None, k0=None, k1=None, precision="auto") -> DistResult:
    """P(S <= b) ~ P(Gamma_k > (n+1) u_k for k0 <= k <= k1)."""
    if isinstance(u, BoundaryVector):
        if not u.domain.index_only:
            raise ValueError("the gamma approximation needs an index-only domain")
        n = u.n
        k0 = u.domain.k0 if k0 is None else k0
        k1 = u.domain.k1 if k1 is None else k1
        uu = u.one_based()
    else:
        if n is None:
            raise ValueError("n is required when u is a plain sequence")
        uu = np.concatenate([[0.0], np.asarray(u, dtype=float)])
        k0 = 1 if k0 is None else k0
        k1 = uu.size - 1 if k1 is None else k1
    d = (n + 1) * uu[: k1 + 1]
    if np.all(d[k0:] <= 0.0):
        return DistResult(1.0, 0.0, "gamma")
    lgf = log_factorial_table(k1 + 2)

    def ffn():
        sf, le, ratio, _ = R.index_sf_float("poisson", d, 0, k0, k1, lgf, n)
        return sf, le, ratio

    def mfn():
        return R.index_sf_mp("poisson", R.to_mp(d), 0, k0, k1)

    return _drive("gamma", ffn, mfn, precision, sf_form=True, size=k1 - k0)


# ---- linear boundary -------------------------------------------------------------

@dataclass(frozen=True)
class LinearBoundary:
    """d_k = a + lambda * k for k = 1..k1."""

    a: float
    lam: float
    k1: int

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("slope must be >= 0")
        if self.k1 < 1:
            raise ValueError("k1 must be >= 1")
        if min(self.a + self.lam, self.a + self.lam * self.k1) < -1e-12:
            raise ValueError("a + lambda k must be >= 0 for k = 1..k1")


def linear_boundary_prob(lb: LinearBoundary) -> float:
    """P(Gamma_k > a + lambda k, k = 1..k1) ~ e^{-a} (1 - lambda + h_k1(lambda))."""
    v = math.exp(-lb.a) * (1.0 - lb.lam + h(lb.k1, lb.lam))
    return min(max(v, 0.0), 1.0)


def ks_cdf_approx(n: int, b: float) -> float:
    """P(KS+ <= b) over the full index domain, valid for 0 < b <= 1/n."""
    if not 0 < b <= 1.0 / n:
        raise ValueError("the closed form holds only for 0 < b <= 1/n; use the exact route")
    return linear_boundary_prob(LinearBoundary(-(n + 1) * b, (n + 1) / n, n))


# ---- close-to-linear Poisson sum ---------------------------------------------------

def check_close_linear(d, dprime, n, k0, k1, tol=1e-12):
    """Grid checks: d/(n+1) < 1, increasing, convex, slope < 1, d_k < k for k > 1."""
    d = np.asarray(d, dtype=float)
    dp = np.asarray(dprime, dtype=float)
    ks = np.arange(k0, k1 + 1)
    dk = d[ks - 1]
    bad = {}
    if np.any(dk >= n + 1):
        bad["D < 1"] = ks[dk >= n + 1].tolist()
    if ks.size > 1:
        inc = np.diff(dk) <= 0
        if inc.any():
            bad["increasing"] = ks[1:][inc].tolist()
    if ks.size > 2:
        cvx = np.diff(dk, 2) < -tol * np.maximum(1.0, np.abs(dk[2:]))
        if cvx.any():
            bad["convex"] = ks[1:-1][cvx].tolist()
    slope = dp[ks - 1] / (n + 1)
    if np.any(slope >= 1):
        bad["slope < 1"] = ks[slope >= 1].tolist()
    big = (ks > 1) & (dk >= ks)
    if big.any():
        bad["d_k < k"] = ks[big].tolist()
    return bad


def sf_poisson_sum(d, dprime, n, k0, k1, check=True) -> float:
    """P(S >= b) ~ sum_k (1 - d'_k/n + h_{k*}(d'_k/n)) Pois(d_k)(k), k* = min(k1-k, floor(sqrt n)).

    ``d`` and ``dprime`` are indexed k = 1..k1 (0-based storage).  h_0(x) is
    taken as x so the last rank contributes its full Poisson mass.
    """
    d = np.asarray(d, dtype=float)
    dp = np.asarray(dprime, dtype=float)
    if check:
        bad = check_close_linear(d, dp, n, k0, k1)
        if bad:
            detail = "; ".join(f"{name} fails at k={ks[:10]}" for name, ks in bad.items())
            raise ConditionError(f"close-to-linear conditions violated: {detail}")
    ks = np.arange(k0, k1 + 1)
    x = dp[ks - 1] / n
    kstar = np.minimum(k1 - ks, math.isqrt(n))
    hk = np.where(kstar > 0, h(np.maximum(kstar, 1), np.maximum(x, 0.0)), x)
    w = 1.0 - x + hk
    total = math.fsum((w * poisson_pmf(ks, d[ks - 1])).tolist())
    return min(max(total, 0.0), 1.0)


def hc_g(x, b0):
    """Closed-form HC (2004) boundary g(x, b0) and its x-derivative."""
    x = np.asarray(x, dtype=float)
    r = np.sqrt(b0 * b0 + 4.0 * x * (1.0 - x))
    g = (x + (b0 * b0 - b0 * r) / 2.0) / (1.0 + b0 * b0)
    gp = (1.0 - b0 * (1.0 - 2.0 * x) / r) / (1.0 + b0 * b0)
    return g, gp


def hc_sf_approx(n: int, b: float, k0: int = 1, k1: int | None = None) -> float:
    """Poisson-sum tail of HC (2004) under the null.

    The Poisson means are n g(k/n, b0) and the slopes (n+1) g'(k/n, b0); the
    general form uses (n+1) for both, which differs by O(1/n).
    """
    k1 = n // 2 if k1 is None else k1
    b0 = b / math.sqrt(n)
    if b0 <= 0:
        raise ConditionError("needs b > 0")
    if b0 <= 2.0 * k1 / n - 1.0:
        raise ConditionError("needs b/sqrt(n) > 2x - 1 over the domain")
    x = np.arange(1, k1 + 1) / n
    g, gp = hc_g(x, b0)
    return sf_poisson_sum(n * g, (n + 1) * gp, n, k0, k1, check=False)


def poisson_tail_inputs(family: GofFamily, n: int, b: float, domain: SupDomain | None = None,
                        f0=None, h1=None, side=PvalueSide.TWO_SIDED, step=1e-6):
    """d_k = (n+1) D(g(k/n, b)) and d'_k = (n+1) d/dx D(g(x, b)) at x = k/n.

    The derivative is analytic for HC (2004) under the null and a central
    difference in x otherwise.
    """
    dom = (domain or SupDomain.default(n)).resolve(n)
    x = np.arange(1, dom.k1 + 1) / n
    if family == HC2004 and h1 is None and dom.index_only:
        g, gp = hc_g(x, b / math.sqrt(n))
        return (n + 1) * np.clip(g, 0.0, 1.0), (n + 1) * gp

    def Dg(xs):
        # D(g(x, b)) off the rank grid
        gv = g_inverse(family, n, np.clip(xs, 1e-300, 1.0), b)
        return gv if h1 is None else transform_D(f0, h1, side, gv)

    dv = (n + 1) * boundary_u(family, n, b, SupDomain(1, dom.k1), f0, h1, side).u
    hstep = step * np.maximum(x, 1.0 / n)
    dp = (n + 1) * (Dg(x + hstep) - Dg(x - hstep)) / (2 * hstep)
    return dv, dp


def sf_poisson_tail(family: GofFamily, n: int, b: float, domain: SupDomain | None = None,
                    f0=None, h1=None, side=PvalueSide.TWO_SIDED, check=True) -> float:
    dom = (domain or SupDomain.default(n)).resolve(n)
    if not dom.index_only:
        raise ValueError("the Poisson tail sum needs an index-only domain")
    d, dp = poisson_tail_inputs(family, n, b, dom, f0, h1, side)
    return sf_poisson_sum(d, dp, n, dom.k0, dom.k1, check=check)
