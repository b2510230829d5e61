"""Exact finite-sample distribution of sup-type GOF statistics.

Every route reduces P(S <= b) to a boundary-crossing probability for uniform
order statistics: with u_k = D(max(g(k/n, b), alpha0)) and the transformed
window [beta0, beta1] = [D(alpha0), D(alpha1)],

    S <= b  <=>  for every k0 <= k <= k1:  U_(k) < beta0 or U_(k) > beta1 or U_(k) > u_k.

Four routes are provided:

* ``cdf_index_trunc``  index truncation only, O(k1^2);
* ``cdf_pvalue_trunc`` p-value truncation only (k0 = 1, k1 = n), O(n^3);
* ``cdf_modified``     both truncations with alpha1 = 1, O(n^2);
* ``cdf_general``      any domain, O(n^3).

All of them are sums over disjoint "last crossing" events weighted by chain
probabilities from :mod:`sigdetect._recursion`.  The float64 evaluation comes
with a running rounding-error bound; when the bound misses the accuracy target
the same formula is re-evaluated with gmpy2 at a precision derived from it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import gmpy2
import numpy as np
from gmpy2 import mpfr
from scipy import special as sp

from . import _recursion as R
from .gof import GofFamily, SupDomain, g_inverse
from .models import PvalueSide, transform_D
from .special import log_factorial_table

LOSS_RATIO = 1e8
MAX_BITS = 1 << 16


class PrecisionError(ArithmeticError):
    """The requested accuracy could not be reached within the precision cap."""


@dataclass(frozen=True)
class DistResult:
    cdf: float
    sf: float
    method: str
    precision_bits: int = 53
    error_bound: float = 0.0
    cancellation_ratio: float = 1.0
    loss_of_significance: bool = False
    truncated: bool = False

    def __float__(self):
        return self.cdf


@dataclass
class BoundaryVector:
    """u_k for k = 1..k1 (stored 0-based: ``u[k-1]``) plus the window [beta0, beta1]."""

    u: np.ndarray
    n: int
    domain: SupDomain
    beta0: float = 0.0
    beta1: float = 1.0
    flags: list = field(default_factory=list)

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        self.domain = self.domain.resolve(self.n)
        if self.u.size < self.domain.k1:
            raise ValueError("boundary shorter than k1")
        if np.any(~((self.u >= 0) & (self.u <= 1))):
            raise ValueError("boundary values must lie in [0, 1]")

    def at(self, k: int) -> float:
        return float(self.u[k - 1])

    def one_based(self) -> np.ndarray:
        return np.concatenate([[0.0], self.u[: self.domain.k1]])


def boundary_u(family: GofFamily, n: int, b: float, domain: SupDomain | None = None,
               f0=None, h1=None, side=PvalueSide.TWO_SIDED) -> BoundaryVector:
    """u_k = D(max(g(k/n, b), alpha0)) for k = 1..k1, capped at beta1 = D(alpha1).

    ``h1=None`` gives the null (D = identity).  A decreasing stretch of u is
    replaced by its running maximum from k0 on index-only domains, which leaves
    the crossing event unchanged; with p-value truncation it is an error.
    """
    dom = (domain or SupDomain.default(n)).resolve(n)
    k = np.arange(1, dom.k1 + 1)
    g = g_inverse(family, n, k / n, b)
    g = np.maximum(g, dom.alpha0)
    if h1 is None:
        D = lambda v: np.asarray(v, dtype=float)  # noqa: E731
    else:
        if f0 is None:
            raise ValueError("an alternative needs the null component f0")
        D = lambda v: transform_D(f0, h1, side, v)  # noqa: E731
    u = np.clip(D(g), 0.0, 1.0)
    beta0 = float(D(np.array(dom.alpha0)))
    beta1 = float(D(np.array(dom.alpha1)))
    u = np.minimum(np.maximum(u, beta0), beta1)
    flags = []
    seg = u[dom.k0 - 1:]
    if np.any(np.diff(seg) < 0):
        if dom.index_only:
            u[dom.k0 - 1:] = np.maximum.accumulate(seg)
            flags.append("nonmonotone_boundary_fixed")
        else:
            raise ValueError("boundary u_k is not nondecreasing on a p-value truncated domain")
    return BoundaryVector(u, n, dom, beta0, beta1, flags)


# ---- precision driver ----------------------------------------------------------------

def _target(sf: float) -> float:
    sf = abs(sf)
    return max(min(1e-12, 1e-8 * sf), 1e-300)


def _mp_eval(mp_fn, bits, sf_form):
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        v = mp_fn()
        sf = v if sf_form else 1 - v
        return float(v), float(sf)


def _drive(method, float_fn, mp_fn, precision, sf_form: bool, size: int):
    """Evaluate in float64 and fall back to multiple precision when needed.

    float_fn() -> (value, log error bound in units of 2^-53, cancellation ratio);
    mp_fn() -> mpfr value at the ambient gmpy2 precision.  ``value`` is the SF
    when ``sf_form`` else the CDF.  The float64 result is kept when its running
    error bound meets the target.  Otherwise the formula is re-evaluated at p
    and p + max(32, p/4) bits, doubling p until the two agree to the target.
    """
    def pack(val, sf, bits, err, ratio):
        sf = min(max(sf, 0.0), 1.0)
        cdf = 1.0 - sf if sf_form else min(max(val, 0.0), 1.0)
        loss = err > 1e-8 * max(sf, 1e-300) and err > 1e-14
        return DistResult(min(max(cdf, 0.0), 1.0), sf, method, bits, err, ratio, loss)

    if isinstance(precision, int) and not isinstance(precision, bool):
        bits = max(int(precision), 53)
        val, sf = _mp_eval(mp_fn, bits, sf_form)
        return pack(val, sf, bits, math.nan, math.nan)
    if precision not in ("auto", "double", None):
        raise ValueError(f"precision must be 'auto', 'double' or an int, got {precision!r}")
    val, logerr, ratio = float_fn()
    ok = math.isfinite(val) and math.isfinite(logerr)
    err = math.exp(min(logerr, 700.0)) * R.UNIT if ok else math.inf
    sf_est = (val if sf_form else 1.0 - val) if ok else math.nan
    if precision == "double":
        if not math.isfinite(val):
            raise PrecisionError(f"{method}: float64 evaluation overflowed")
        return pack(val, sf_est, 53, err, ratio)
    if ok and err <= _target(sf_est):
        return pack(val, sf_est, 53, err, ratio)
    bits = R.initial_bits(size)
    prev = _mp_eval(mp_fn, bits, sf_form)
    while True:
        hi = bits + max(32, bits // 4)
        if hi > MAX_BITS:
            raise PrecisionError(f"{method}: more than {MAX_BITS} bits required")
        cur = _mp_eval(mp_fn, hi, sf_form)
        diff = abs(cur[1] - prev[1])
        if diff <= _target(cur[1]) / 4:
            return pack(cur[0], cur[1], hi, diff, ratio)
        bits *= 2
        prev = _mp_eval(mp_fn, bits, sf_form)


def _as_boundary(u, n, k0, k1, alpha0=0.0, alpha1=1.0, beta0=None, beta1=None):
    if isinstance(u, BoundaryVector):
        return u
    if n is None:
        raise ValueError("n is required when u is a plain sequence")
    u = np.asarray(u, dtype=float)
    k1 = u.size if k1 is None else k1
    dom = SupDomain(1 if k0 is None else k0, k1, alpha0, alpha1)
    b0 = alpha0 if beta0 is None else beta0
    b1 = alpha1 if beta1 is None else beta1
    return BoundaryVector(u, n, dom, b0, b1)


def _truncate_default(n, truncate):
    # the inner terms of the normalised recursion do not decay, so dropping
    # them is only safe when the caller asks for it explicitly
    return False if truncate is None else bool(truncate)


# ---- index truncation --------------------------------------------------------------

def cdf_index_trunc(u, n=None, k0=None, k1=None, precision="auto", truncate=None) -> DistResult:
    """P(S <= b) for the domain {k0 <= i <= k1} from the boundary u_1..u_k1."""
    bv = _as_boundary(u, n, k0, k1)
    n, dom = bv.n, bv.domain
    k0 = dom.k0 if k0 is None else k0
    k1 = dom.k1 if k1 is None else k1
    x = bv.one_based()[: k1 + 1]
    seg = x[k0:k1 + 1]
    if np.all(seg <= 0.0):
        return DistResult(1.0, 0.0, "index")
    if np.any(seg >= 1.0):
        return DistResult(0.0, 1.0, "index")
    trunc = _truncate_default(n, truncate)
    lgf = log_factorial_table(n + 2)

    def ffn():
        sf, le, ratio, _ = R.index_sf_float("binomial", x, n + 1, k0, k1, lgf, n, truncate=trunc)
        return sf, le, ratio

    def mfn():
        return R.index_sf_mp("binomial", R.to_mp(x), n + 1, k0, k1, truncate=trunc)

    return _drive("index", ffn, mfn, precision, sf_form=True, size=k1 - k0)


# ---- p-value truncation ------------------------------------------------------------

def _window_x(bv):
    x = bv.one_based().copy()
    return np.minimum(x / bv.beta1, 1.0)


def cdf_pvalue_trunc(u, n=None, alpha0=0.0, alpha1=1.0, beta0=None, beta1=None,
                     precision="auto") -> DistResult:
    """P(S <= b) for {alpha0 <= p_(i) <= alpha1} over all ranks (k0 = 1, k1 = n).

    Decomposes by the window configuration (i - 1 p-values below beta0, ranks
    i..j-1 inside, the rest above beta1) and adds the mass of configurations
    with an empty window, (beta0 + 1 - beta1)^n.
    """
    bv = _as_boundary(u, n, 1, n if n is not None else None, alpha0, alpha1, beta0, beta1)
    n = bv.n
    if bv.domain.k0 != 1 or bv.domain.k1 != n:
        raise ValueError("p-value truncation needs k0 = 1 and k1 = n")
    b0, b1 = bv.beta0, bv.beta1
    if b1 <= b0:
        return DistResult(1.0, 0.0, "pvalue")
    xw = _window_x(bv)
    lgf = log_factorial_table(n + 2)
    lb1 = _safe_log(b1)
    empty = (b0 + 1.0 - b1) ** n

    def ffn():
        vals, errs, ratio = [empty], [math.log(R.TOP_ULPS * empty) if empty > 0 else -math.inf], 1.0
        absum = 0.0
        for j in range(2, n + 2):
            lw_top = sp.xlogy(n - j + 1, 1.0 - b1) if b1 < 1 else (0.0 if j == n + 1 else -math.inf)
            if lw_top == -math.inf:
                continue
            ch = R.chain_float("binomial", xw, j, 1, j - 1, lgf)
            if ch.failed:
                return math.nan, math.inf, math.inf
            ratio = max(ratio, ch.max_ratio)
            i = np.arange(1, j)
            lw = (lgf[n] - lgf[i - 1] - lgf[j - i] - lgf[n - j + 1]
                  + sp.xlogy(i - 1, b0) + (j - i) * lb1 + lw_top)
            live = ch.sign[i] != 0
            a = np.where(live, np.exp(lw + ch.logq[i]), 0.0)
            vals.extend((ch.sign[i] * a).tolist())
            absum += float(a.sum())
            mag = lgf[n] + lgf[i - 1] + lgf[j - i] + np.abs(sp.xlogy(i - 1, b0)) + (j - i) * abs(lb1) \
                + abs(lw_top) + np.abs(np.where(live, ch.logq[i], 0.0))
            ok = live & np.isfinite(lw)
            with np.errstate(invalid="ignore"):
                errs.append(R._lse(np.where(ok, lw + ch.logq[i] + np.log(2.0 + 2.0 * mag), -math.inf)))
                errs.append(R._lse(np.where(np.isfinite(lw), lw + ch.logerr[i], -math.inf)))
        v = math.fsum(vals)
        errs.append(math.log(abs(v) + 1e-300))
        return v, R._logaddexp(*errs), ratio

    def mfn():
        xm = R.to_mp(xw)
        B0, B1 = mpfr(b0), mpfr(b1)
        acc = (B0 + 1 - B1) ** n
        fn = gmpy2.fac(n)
        for j in range(2, n + 2):
            if b1 == 1.0 and j != n + 1:
                continue
            q = R.chain_mp("binomial", xm, j, 1, j - 1)
            top = (1 - B1) ** (n - j + 1)
            for i in range(1, j):
                w = fn / (gmpy2.fac(i - 1) * gmpy2.fac(j - i) * gmpy2.fac(n - j + 1))
                acc += w * B0 ** (i - 1) * B1 ** (j - i) * top * q[i]
        return acc

    return _drive("pvalue", ffn, mfn, precision, sf_form=False, size=n)


def _safe_log(v):
    return math.log(v) if v > 0 else -math.inf


# ---- alpha1 = 1 with both truncations ----------------------------------------------

def cdf_modified(u, n=None, k0=None, k1=None, alpha0=None, beta0=None, precision="auto",
                 truncate=None) -> DistResult:
    """P(S <= b) for {k0 <= i <= k1} x {p_(i) >= alpha0}, O(k1^2).

    Splits on the first rank i with U_(i) >= beta0.  For i >= k0 the chain
    starts at i; for i < k0 the ranks i..k0-1 are free above beta0.  The event
    that all of k0..k1 fall below beta0 contributes P(U_(k1) < beta0).
    """
    if isinstance(u, BoundaryVector):
        bv = u
    else:
        a0 = 0.0 if alpha0 is None else alpha0
        bv = _as_boundary(u, n, k0, k1, a0, 1.0, beta0, 1.0)
    n, dom = bv.n, bv.domain
    k0 = dom.k0 if k0 is None else k0
    k1 = dom.k1 if k1 is None else k1
    if bv.beta1 < 1.0 or dom.alpha1 < 1.0:
        raise ValueError("cdf_modified needs alpha1 = 1")
    b0 = bv.beta0
    x = bv.one_based()[: k1 + 1]
    if np.any(x[k0:] >= 1.0):
        below = float(sp.betainc(k1, n - k1 + 1, b0)) if b0 > 0 else 0.0
        return DistResult(below, 1.0 - below, "modified")
    m = n - k1 + 1
    lgf = log_factorial_table(n + 2)
    trunc = _truncate_default(n, truncate)

    def ffn():
        ch = R.chain_float("binomial", x, n + 1, k0, k1, lgf, truncate=trunc)
        if ch.failed:
            return math.nan, math.inf, math.inf
        vals, errs = [], []
        below = float(sp.betainc(k1, m, b0)) if b0 > 0 else 0.0
        vals.append(below)
        errs.append(_safe_log(R.TOP_ULPS * below))
        # i >= k0: C(n, i-1) beta0^(i-1) q_i
        i = np.arange(k0, k1 + 1)
        lw = lgf[n] - lgf[i - 1] - lgf[n - i + 1] + sp.xlogy(i - 1, b0)
        _acc(vals, errs, lw, ch, i, lgf[n] + lgf[i - 1] + lgf[n - i + 1] + np.abs(sp.xlogy(i - 1, b0)))
        if k0 > 1:
            # beta0 = 0 leaves only i = 1 (0^0 = 1)
            ii = np.arange(1, k0)
            lpi = lgf[n] - lgf[ii - 1] - lgf[n - ii + 1] + sp.xlogy(ii - 1, b0) + sp.xlog1py(n - ii + 1, -b0)
            z = (x[k1] - b0) / (1.0 - b0)
            tail = sp.betainc(m, k1 + 1 - ii, 1.0 - z)
            first = np.exp(lpi) * tail
            vals.extend(first.tolist())
            errs.append(_safe_log(R.TOP_ULPS * float(first.sum())))
            kk = np.arange(k0, k1)
            if kk.size:
                I, K = np.meshgrid(ii, kk, indexing="ij")
                with np.errstate(divide="ignore"):
                    ld = np.log(x[K] - b0)
                lw2 = (lgf[n] - lgf[I - 1] - lgf[K + 1 - I] - lgf[n - K]
                       + sp.xlogy(I - 1, b0) + np.where(K + 1 - I > 0, (K + 1 - I) * ld, 0.0))
                mag2 = lgf[n] + lgf[I - 1] + lgf[K + 1 - I] + lgf[n - K] + np.abs(sp.xlogy(I - 1, b0)) \
                    + np.abs(np.where(K + 1 - I > 0, (K + 1 - I) * ld, 0.0))
                _acc(vals, errs, lw2, ch, K + 1, mag2, negate=True)
        v = math.fsum(vals)
        errs.append(_safe_log(abs(v) + 1e-300))
        return v, R._logaddexp(*errs), ch.max_ratio

    def mfn():
        xm = R.to_mp(x)
        q = R.chain_mp("binomial", xm, n + 1, k0, k1, truncate=trunc)
        B0 = mpfr(b0)
        acc = _binom_upper_mp(n, k1, B0) if b0 > 0 else mpfr(0)
        for i in range(k0, k1 + 1):
            acc += gmpy2.comb(n, i - 1) * B0 ** (i - 1) * q[i]
        if k0 > 1:
            z = (xm[k1] - B0) / (1 - B0)
            fn = gmpy2.fac(n)
            for i in range(1, k0):
                pi = gmpy2.comb(n, i - 1) * B0 ** (i - 1) * (1 - B0) ** (n - i + 1)
                # survival of Beta(k1+1-i, m) at z = P(Bin(n-i+1, z) <= k1-i)
                acc += pi * (1 - _binom_upper_mp(n - i + 1, k1 + 1 - i, z))
                for k in range(k0, k1):
                    w = fn / (gmpy2.fac(i - 1) * gmpy2.fac(k + 1 - i) * gmpy2.fac(n - k))
                    acc -= w * B0 ** (i - 1) * (xm[k] - B0) ** (k + 1 - i) * q[k + 1]
        return acc

    return _drive("modified", ffn, mfn, precision, sf_form=False, size=k1 - k0 + 1)


def _acc(vals, errs, lw, ch, idx, mag, negate=False):
    """Append sign * exp(lw) * q[idx] terms and their error contributions."""
    lq = ch.logq[idx]
    ok = (ch.sign[idx] != 0) & np.isfinite(lw)
    with np.errstate(over="ignore", invalid="ignore"):
        a = np.where(ok, np.exp(np.where(ok, lw + lq, 0.0)), 0.0)
        s = -ch.sign[idx] if negate else ch.sign[idx]
        vals.extend((s * a)[ok].tolist())
        re = lw + lq + np.log(2.0 + 2.0 * (np.where(ok, mag, 0.0) + np.abs(np.where(ok, lq, 0.0))))
        errs.append(R._lse(re[ok]))
        fin = np.isfinite(lw)
        errs.append(R._lse((lw + ch.logerr[idx])[fin]))


def _binom_upper_mp(N, a, x):
    """P(Bin(N, x) >= a) as a positive sum in the ambient precision."""
    if a <= 0:
        return mpfr(1)
    if a > N or x == 0:
        return mpfr(0)
    if x == 1:
        return mpfr(1)
    p = gmpy2.comb(N, a) * x ** a * (1 - x) ** (N - a)
    acc = p
    r = x / (1 - x)
    for t in range(a + 1, N + 1):
        p = p * (N - t + 1) / t * r
        acc += p
    return acc


# ---- general domain ------------------------------------------------------------------

def cdf_general(u, n=None, domain: SupDomain | None = None, beta0=None, beta1=None,
                precision="auto") -> DistResult:
    """P(S <= b) for an arbitrary domain {k0<=i<=k1} x {alpha0<=p_(i)<=alpha1}.

    Computes the survival function as a positive sum over disjoint events
    "the window ends below rank j and the last violated rank is k":

        SF = sum_j [ Bin(n, beta1)(j-1) * (I(u_T/beta1) - I(beta0/beta1))
                     + sum_{k=k0}^{T-1} (u_k^k - beta0^k)/k! * C_k(j) * q_j(k+1) ]

    with T = min(j-1, k1), I the Beta(T, j-T) CDF,
    C_k(j) = n! beta1^(j-k-1) (1-beta1)^(n-j+1) / ((j-k-1)! (n-j+1)!)
    and q_j the chain probability of j-k-1 uniforms on [0, beta1].
    """
    if isinstance(u, BoundaryVector):
        bv = u
    else:
        dom = (domain or SupDomain()).resolve(n)
        bv = BoundaryVector(np.asarray(u, dtype=float), n, dom,
                            dom.alpha0 if beta0 is None else beta0,
                            dom.alpha1 if beta1 is None else beta1)
    n, dom = bv.n, bv.domain
    k0, k1 = dom.k0, dom.k1
    b0, b1 = bv.beta0, bv.beta1
    if b1 <= b0:
        return DistResult(1.0, 0.0, "general")
    x = bv.one_based()[: k1 + 1]
    xw = np.minimum(x / b1, 1.0)
    lgf = log_factorial_table(n + 2)
    lb1 = _safe_log(b1)
    # log w_k = log((u_k^k - beta0^k) / k!)
    kk = np.arange(0, k1 + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        lu = np.log(x)
        lw = kk * lu + np.log(-np.expm1(kk * (np.log(b0) - lu))) - lgf[kk] if b0 > 0 \
            else kk * lu - lgf[kk]
    lw = np.where(x > b0, lw, -math.inf)
    lw[0] = -math.inf
    jmin = k0 + 1
    js = [j for j in range(jmin, n + 2) if b1 < 1.0 or j == n + 1]

    def ffn():
        vals, errs, ratio = [], [], 1.0
        for j in js:
            T = min(j - 1, k1)
            ltop = sp.xlog1py(n - j + 1, -b1) if b1 < 1 else 0.0
            lpmf = lgf[n] - lgf[j - 1] - lgf[n - j + 1] + sp.xlogy(j - 1, b1) + ltop
            x1 = min(x[T] / b1, 1.0)
            x0 = b0 / b1
            d, dmag = _beta_diff(T, j - T, x1, x0)
            p1 = math.exp(lpmf) * d
            vals.append(p1)
            errs.append(_safe_log(R.TOP_ULPS * math.exp(lpmf) * dmag + abs(p1) * (4 + 4 * abs(lpmf) + lgf[n])))
            if T > k0:
                ch = R.chain_float("binomial", xw, j, k0 + 1, T, lgf)
                if ch.failed:
                    return math.nan, math.inf, math.inf
                ratio = max(ratio, ch.max_ratio)
                k = np.arange(k0, T)
                lc = lgf[n] - lgf[j - k - 1] - lgf[n - j + 1] + (j - k - 1) * lb1 + ltop
                mag = lgf[n] + lgf[j - k - 1] + lgf[n - j + 1] + np.abs((j - k - 1) * lb1) + abs(ltop) \
                    + np.abs(np.where(np.isfinite(lw[k]), lw[k], 0.0)) + lgf[k]
                _acc(vals, errs, lc + lw[k], ch, k + 1, mag)
        v = math.fsum(vals)
        errs.append(_safe_log(abs(v) + 1e-300))
        return v, R._logaddexp(*errs) if errs else -math.inf, ratio

    def mfn():
        xm = R.to_mp(x)
        B0, B1 = mpfr(b0), mpfr(b1)
        xwm = np.array([min(v / B1, mpfr(1)) for v in xm], dtype=object)
        fn = gmpy2.fac(n)
        acc = mpfr(0)
        wk = [mpfr(0)] * (k1 + 1)
        for k in range(1, k1 + 1):
            if xm[k] > B0:
                wk[k] = (xm[k] ** k - B0 ** k) / gmpy2.fac(k)
        for j in js:
            T = min(j - 1, k1)
            top = (1 - B1) ** (n - j + 1)
            pmf = gmpy2.comb(n, j - 1) * B1 ** (j - 1) * top
            x1 = min(xm[T] / B1, mpfr(1))
            x0 = B0 / B1
            # Beta(T, j-T) CDF difference = P(Bin(j-1, x1) >= T) - P(Bin(j-1, x0) >= T)
            acc += pmf * (_binom_upper_mp(j - 1, T, x1) - _binom_upper_mp(j - 1, T, x0))
            if T > k0:
                q = R.chain_mp("binomial", xwm, j, k0 + 1, T)
                for k in range(k0, T):
                    c = fn / (gmpy2.fac(j - k - 1) * gmpy2.fac(n - j + 1)) * B1 ** (j - k - 1) * top
                    acc += wk[k] * c * q[k + 1]
        return acc

    return _drive("general", ffn, mfn, precision, sf_form=True, size=k1 - k0)


def _beta_diff(a, b, x1, x0):
    """I_{x1}(a,b) - I_{x0}(a,b) for x0 <= x1, picking the better-conditioned tail."""
    if x0 <= 0:
        v = float(sp.betainc(a, b, x1))
        return v, v
    c1 = float(sp.betainc(a, b, x1))
    if c1 <= 0.5:
        c0 = float(sp.betainc(a, b, x0))
        return c1 - c0, c1 + c0
    s0 = float(sp.betainc(b, a, 1.0 - x0))
    s1 = float(sp.betainc(b, a, 1.0 - x1))
    return s0 - s1, s0 + s1


# ---- dispatch ----------------------------------------------------------------------

def select_route(domain: SupDomain, n: int) -> str:
    """Cheapest applicable exact route for the domain shape."""
    dom = domain.resolve(n)
    if dom.index_only:
        return "index"
    if dom.k0 == 1 and dom.k1 == n:
        return "pvalue"
    if dom.alpha1 == 1.0:
        return "modified"
    return "general"


def exact_cdf(bv: BoundaryVector, route: str = "auto", precision="auto") -> DistResult:
    """Exact P(S <= b) from a boundary vector with the requested (or cheapest) route."""
    route = select_route(bv.domain, bv.n) if route == "auto" else route
    if route == "index":
        if not bv.domain.index_only:
            raise ValueError("index route needs alpha0 = 0 and alpha1 = 1")
        return cdf_index_trunc(bv, precision=precision)
    if route == "pvalue":
        return cdf_pvalue_trunc(bv, precision=precision)
    if route == "modified":
        return cdf_modified(bv, precision=precision)
    if route == "general":
        return cdf_general(bv, precision=precision)
    raise ValueError(f"unknown exact route {route!r}")
