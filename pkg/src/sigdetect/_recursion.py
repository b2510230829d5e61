"""Backward "last crossing" recursion shared by the exact and gamma routes.

For a boundary x_1 <= ... <= x_T the chain probabilities

    q_k = top_k - sum_{i=k}^{T-1} coef(k, i) q_{i+1},        k = T, T-1, ..., lo

come in two flavours:

* ``binomial``: coef(k, i) = C(N_k, i-k+1) x_i^(i-k+1) with N_k = ntop - k and
  top_k = P(Bin(N_k, x_T) <= T - k).  q_k is the probability that N_k sorted
  uniforms V satisfy V_t > x_{k+t-1} for t = 1..T-k+1.
* ``poisson``: coef(k, i) = x_i^(i-k+1) / (i-k+1)! and top_k = P(Pois(x_T) <= T-k);
  the same statement for the arrival times of a unit-rate Poisson process.

The alternating sum cancels badly for large T.  The float64 path carries every
term in log form, sums with math.fsum and propagates a running first-order
error bound (in units of the unit roundoff 2^-53).  The multiple-precision path
repeats the computation with gmpy2 at a precision chosen from that bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
import numpy as np
from gmpy2 import mpfr
from scipy import special as sp

UNIT = 2.0 ** -53
# relative accuracy assumed for scipy's incomplete beta/gamma, in units of UNIT
TOP_ULPS = 64.0


def _lse(v: np.ndarray) -> float:
    """log(sum(exp(v))) ignoring -inf entries."""
    if v.size == 0:
        return -math.inf
    m = float(np.max(v))
    if m == -math.inf:
        return -math.inf
    return m + math.log(float(np.sum(np.exp(v - m))))


def _logaddexp(*vals: float) -> float:
    m = max(vals)
    if m == -math.inf:
        return -math.inf
    return m + math.log(sum(math.exp(v - m) for v in vals))


@dataclass
class FloatChain:
    """q_k for k = lo..T in log form, with log error bounds (units of UNIT)."""

    logq: np.ndarray  # index k; -inf where q_k = 0 or k outside [lo, T]
    sign: np.ndarray
    logerr: np.ndarray
    max_ratio: float  # largest sum|terms| / |q_k| seen (cancellation monitor)
    truncated: int = 0  # number of inner terms dropped by truncation
    failed: bool = False  # float64 overflow; the caller must switch to multiple precision

    def value(self, k: int) -> float:
        return float(self.sign[k] * math.exp(self.logq[k]))


def _log_coef(kind, ntop, k, i, lx, lgf):
    """log coef(k, i) and the magnitude of the log terms it was assembled from."""
    j = i - k + 1
    if kind == "binomial":
        N = ntop - k
        with np.errstate(invalid="ignore"):
            jl = np.where(j > 0, j * lx[i], 0.0)
        lc = lgf[N] - lgf[j] - lgf[N - j] + jl
        mag = lgf[N] + lgf[j] + lgf[N - j] + np.abs(jl)
    else:
        with np.errstate(invalid="ignore"):
            jl = np.where(j > 0, j * lx[i], 0.0)
        lc = jl - lgf[j]
        mag = lgf[j] + np.abs(jl)
    return lc, mag


def tops_float(kind, xT, ntop, T, ks):
    ks = np.asarray(ks)
    if kind == "binomial":
        # P(Bin(ntop-k, x) <= T-k) = survival of Beta(T-k+1, ntop-T) at x
        return sp.betainc(ntop - T, T - ks + 1.0, 1.0 - xT)
    return sp.gammaincc(T - ks + 1.0, xT)


def chain_float(kind, x, ntop, lo, T, lgf, truncate=False, trunc_run=30, trunc_rel=1e-17):
    """Run the recursion in float64; ``x`` is indexed 1..T (x[0] unused)."""
    size = T + 2
    logq = np.full(size, -math.inf)
    sign = np.zeros(size)
    logerr = np.full(size, -math.inf)
    with np.errstate(divide="ignore"):
        lx = np.log(np.asarray(x, dtype=float))
    max_ratio = 0.0
    dropped = 0
    if T < lo:
        return FloatChain(logq, sign, logerr, max_ratio)
    ks = np.arange(lo, T + 1)
    tops = tops_float(kind, float(x[T]), ntop, T, ks)
    cap = None  # max number of inner terms kept when truncating
    failed = False
    for k in range(T, lo - 1, -1):
        top = float(tops[k - lo])
        if k == T:
            qk = top
            err = _log_or_ninf(TOP_ULPS * top)
            ratio = 1.0
        else:
            hi = T if cap is None else min(T, k + cap)
            i = np.arange(k, hi)
            lc, mag = _log_coef(kind, ntop, k, i, lx, lgf)
            lqi = logq[i + 1]
            lt = lc + lqi
            live = sign[i + 1] != 0
            with np.errstate(over="ignore", invalid="ignore"):
                absval = np.where(live, np.exp(lt), 0.0)
                terms = sign[i + 1] * absval
            qk = top - _fsum(terms)
            with np.errstate(over="ignore"):
                sum_abs = float(absval.sum())
            rnd = _round_err(absval, mag, lqi, live)
            prop = _lse(np.where(live | np.isfinite(logerr[i + 1]), lc + logerr[i + 1], -math.inf))
            err = _logaddexp(_log_or_ninf(TOP_ULPS * top + rnd + abs(qk) + 2 * sum_abs), prop)
            ratio = (top + sum_abs) / abs(qk) if qk != 0 else math.inf
            if truncate:
                cap, d = _next_cap(absval, abs(qk) + top, trunc_run, trunc_rel, cap, T - k)
                dropped += d
        max_ratio = max(max_ratio, ratio)
        if not math.isfinite(qk):
            failed = True
            break
        sign[k] = 0.0 if qk == 0 else math.copysign(1.0, qk)
        logq[k] = math.log(abs(qk)) if qk != 0 else -math.inf
        logerr[k] = err
    return FloatChain(logq, sign, logerr, max_ratio, dropped, failed)


def _fsum(v: np.ndarray) -> float:
    """Correctly rounded sum; nan when overflow made the terms meaningless."""
    if not np.all(np.isfinite(v)):
        return math.nan
    return math.fsum(v.tolist())


def _round_err(absval, mag, lq, live):
    """Rounding error (units of UNIT) of exp-assembled terms: relative error ~ log magnitude."""
    ok = live & (absval > 0)
    if not ok.any():
        return 0.0
    with np.errstate(over="ignore"):
        return float(np.sum(absval[ok] * (2.0 + 2.0 * (mag[ok] + np.abs(lq[ok])))))


def _log_or_ninf(v: float) -> float:
    return math.log(v) if v > 0 else -math.inf


def _next_cap(absval, scale, run, rel, cap, avail):
    """Length to keep at the next level: stop after ``run`` consecutive negligible terms."""
    small = absval < rel * scale
    n = small.size
    if n < run:
        return cap, 0
    # first position where a run of `run` small terms ends
    c = np.convolve(small.astype(np.int32), np.ones(run, dtype=np.int32), mode="valid")
    hits = np.nonzero(c == run)[0]
    if hits.size == 0:
        return (None if cap is None else cap + run), 0
    end = int(hits[0]) + run
    return end + 1, 0


def index_sf_float(kind, x, ntop, k0, T, lgf, n_level1, truncate=False):
    """SF of the index-truncated statistic: base + sum_{i=k0}^{T-1} coef(1, i) q_{i+1}.

    Returns (sf, log error bound in UNIT, cancellation ratio, chain).
    """
    ch = chain_float(kind, x, ntop, k0 + 1, T, lgf, truncate=truncate)
    if ch.failed:
        return math.nan, math.inf, math.inf, ch
    xT = float(x[T])
    if kind == "binomial":
        base = float(sp.betainc(T, ntop - T, xT))  # P(Bin(ntop-1, x_T) >= T)
    else:
        base = float(sp.gammainc(T, xT))  # P(Pois(x_T) >= T)
    if T <= k0:
        return base, _log_or_ninf(TOP_ULPS * base), 1.0, ch
    with np.errstate(divide="ignore"):
        lx = np.log(np.asarray(x, dtype=float))
    i = np.arange(k0, T)
    lc, mag = _log_coef(kind, ntop, 1, i, lx, lgf)
    lqi = ch.logq[i + 1]
    live = ch.sign[i + 1] != 0
    with np.errstate(over="ignore", invalid="ignore"):
        absval = np.where(live, np.exp(lc + lqi), 0.0)
        sf = base + _fsum(ch.sign[i + 1] * absval)
    rnd = _round_err(absval, mag, lqi, live)
    prop = _lse(lc + ch.logerr[i + 1])
    err = _logaddexp(_log_or_ninf(TOP_ULPS * base + rnd + abs(sf)), prop)
    return sf, err, ch.max_ratio, ch


# ---- multiple precision ---------------------------------------------------------

def to_mp(values) -> np.ndarray:
    """Object array of mpfr at the current gmpy2 precision (exact for float input)."""
    return np.array([mpfr(float(v)) if not isinstance(v, type(mpfr(0))) else v for v in values],
                    dtype=object)


def tops_mp(kind, xT, ntop, T, lo):
    """top_k for k = lo..T as a dict-like object array indexed by T - k."""
    K = T - lo
    cum = np.empty(K + 1, dtype=object)
    if kind == "binomial":
        m = ntop - T
        p = (1 - xT) ** m
        acc = mpfr(0)
        for t in range(K + 1):
            if t > 0:
                p = p * xT * (m - 1 + t) / t
            acc = acc + p
            cum[t] = acc
    else:
        p = gmpy2.exp(-xT)
        acc = mpfr(0)
        for t in range(K + 1):
            if t > 0:
                p = p * xT / t
            acc = acc + p
            cum[t] = acc
    return cum


def chain_mp(kind, x, ntop, lo, T, truncate=False, trunc_run=30):
    """Same recursion at the ambient gmpy2 precision; x is an mpfr object array 1..T."""
    q = np.empty(T + 2, dtype=object)
    q[:] = mpfr(0)
    if T < lo:
        return q
    cum = tops_mp(kind, x[T], ntop, T, lo)
    coef = np.empty(T + 1, dtype=object)
    coef[:] = mpfr(0)
    cap = None
    tiny = gmpy2.mpfr(2) ** (-gmpy2.get_context().precision - 8)
    for k in range(T, lo - 1, -1):
        top = cum[T - k]
        if k == T:
            q[k] = top
            continue
        j = np.arange(2, T - k + 1).astype(object)
        if kind == "binomial":
            N = ntop - k
            if j.size:
                coef[k + 1:T] = coef[k + 1:T] * x[k + 1:T] * N / j
            coef[k] = N * x[k]
        else:
            if j.size:
                coef[k + 1:T] = coef[k + 1:T] * x[k + 1:T] / j
            coef[k] = x[k]
        hi = T if cap is None else min(T, k + cap)
        terms = coef[k:hi] * q[k + 1:hi + 1]
        q[k] = top - terms.sum()
        if truncate and terms.size > trunc_run:
            scale = abs(q[k]) + top
            small = (np.abs(terms.astype(float)) < float(tiny * scale)).astype(np.int32)
            c = np.convolve(small, np.ones(trunc_run, dtype=np.int32), mode="valid")
            hits = np.nonzero(c == trunc_run)[0]
            cap = int(hits[0]) + trunc_run + 1 if hits.size else (None if cap is None else cap + trunc_run)
    return q


def index_sf_mp(kind, x, ntop, k0, T, truncate=False):
    """Multiple-precision counterpart of index_sf_float (returns an mpfr)."""
    q = chain_mp(kind, x, ntop, k0 + 1, T, truncate=truncate)
    xT = x[T]
    prec = gmpy2.get_context().precision
    if kind == "binomial":
        n = ntop - 1
        # P(Bin(n, xT) >= T) as a positive sum
        if xT == 0:
            base = mpfr(0)
        else:
            p = gmpy2.comb(n, T) * xT ** T * (1 - xT) ** (n - T)
            base = p
            for t in range(T + 1, n + 1):
                p = p * (n - t + 1) / t * xT / (1 - xT) if xT < 1 else mpfr(0)
                base += p
            if xT == 1:
                base = mpfr(1)
    else:
        base = _poisson_upper_mp(xT, T, prec)
    if T <= k0:
        return base
    acc = base
    for i in range(k0, T):
        if kind == "binomial":
            c = gmpy2.comb(ntop - 1, i) * x[i] ** i
        else:
            c = x[i] ** i / gmpy2.fac(i)
        acc += c * q[i + 1]
    return acc


def _poisson_upper_mp(lam, T, prec):
    """P(Pois(lam) >= T) by summing the upper tail."""
    if lam == 0:
        return mpfr(0) if T > 0 else mpfr(1)
    p = gmpy2.exp(-lam + T * gmpy2.log(lam) - gmpy2.lngamma(T + 1))
    acc = p
    t = T
    eps = mpfr(2) ** (-prec - 4)
    while True:
        t += 1
        p = p * lam / t
        acc += p
        if t > lam and p < eps * acc:
            break
    return acc


def initial_bits(size: int) -> int:
    """Starting precision for a chain of ``size`` levels.

    The cancellation in the backward recursion costs roughly 0.7 bits per level
    (measured up to 2000 levels); the escalation loop confirms convergence.
    """
    return int(64 + math.ceil(0.8 * size))
