"""Supremum-type goodness-of-fit statistics over ordered p-values.

S = sup over the domain of f(i/n, p_(i)), where f is either the one-sided
Kolmogorov-Smirnov difference x - y or a signed phi-divergence
+-sqrt(2 n K_s(x, y)).  s = 2, 1, 0, -1 give HC (2004 form), Berk-Jones,
reverse Berk-Jones and HC (2008 form).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

S_RANGE = (-5.0, 5.0)


@dataclass(frozen=True)
class GofFamily:
    kind: str  # "ks" or "phi"
    s: float | None = None

    def __post_init__(self):
        if self.kind not in ("ks", "phi"):
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.kind == "phi":
            if self.s is None or not S_RANGE[0] <= self.s <= S_RANGE[1]:
                raise ValueError(f"phi-divergence parameter s must lie in {list(S_RANGE)}")
            object.__setattr__(self, "s", float(self.s))

    @property
    def name(self) -> str:
        if self.kind == "ks":
            return "ks"
        return {2.0: "hc2004", 1.0: "bj", 0.0: "rbj", -1.0: "hc2008"}.get(self.s, f"phi:s={self.s:g}")

    def __str__(self):
        return self.name


def PhiDiv(s: float) -> GofFamily:
    return GofFamily("phi", s)


KS_PLUS = GofFamily("ks")
HC2004 = PhiDiv(2.0)
BERK_JONES = PhiDiv(1.0)
REVERSE_BERK_JONES = PhiDiv(0.0)
HC2008 = PhiDiv(-1.0)

_ALIASES = {"ks": KS_PLUS, "ks+": KS_PLUS, "hc2004": HC2004, "hc": HC2004, "bj": BERK_JONES,
            "rbj": REVERSE_BERK_JONES, "hc2008": HC2008}


def parse_family(text: str) -> GofFamily:
    """Parse ``hc2004``, ``hc2008``, ``bj``, ``rbj``, ``ks`` or ``phi:s=<real>``."""
    t = text.strip().lower()
    if t in _ALIASES:
        return _ALIASES[t]
    if t.startswith("phi"):
        rest = t[3:].lstrip(":")
        if rest.startswith("s="):
            rest = rest[2:]
        try:
            return PhiDiv(float(rest))
        except ValueError:
            pass
    raise ValueError(f"unknown family {text!r}; use hc2004, hc2008, bj, rbj, ks or phi:s=<real>")


# ---- f-functions -------------------------------------------------------------

def phi_divergence(s, x, y):
    """K_s(x, y) >= 0, evaluated stably; +inf where it diverges."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if s == 1.0:
            out = _xlog_ratio(x, y) + _xlog_ratio(1 - x, 1 - y)
        elif s == 0.0:
            out = _xlog_ratio(y, x) + _xlog_ratio(1 - y, 1 - x)
        else:
            # 1 - x^s y^(1-s) - (1-x)^s (1-y)^(1-s), written with expm1 to avoid cancellation
            t1 = _weighted_expm1(x, y, s)
            t2 = _weighted_expm1(1 - x, 1 - y, s)
            out = -(t1 + t2) / (s * (1 - s))
    out = np.where(np.isnan(out), np.inf, out)
    return np.maximum(out, 0.0)


def _xlog_ratio(a, b):
    # a log(a/b) with 0 log 0 = 0 and a>0, b=0 -> inf
    return np.where(a == 0, 0.0, np.where(b == 0, np.inf, a * (np.log(a) - np.log(b))))


def _weighted_expm1(a, b, s):
    # a^s b^(1-s) - a  =  a * expm1((1-s) log(b/a)), with limits at a = 0 or b = 0
    la = np.log(a)
    lb = np.log(b)
    body = a * np.expm1((1 - s) * (lb - la))
    # a = 0: the term is 0^s b^(1-s) which is b if s == 0, 0 if s > 0, +inf if s < 0 (b>0)
    at_a0 = np.where(s > 0, 0.0, np.where(b > 0, np.inf, 0.0)) if s != 0 else b
    # b = 0: a^s 0^(1-s) - a = -a for s < 1, +inf for s > 1 (a>0)
    at_b0 = -a if s < 1 else np.where(a > 0, np.inf, 0.0)
    return np.where(a == 0, at_a0, np.where(b == 0, at_b0, body))


def f_eval(family: GofFamily, n: int, x, y):
    """f(x, y) for the family; vectorised over x and y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if family.kind == "ks":
        out = x - y
    elif family.s == 2.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = math.sqrt(n) * (x - y) / np.sqrt(y * (1 - y))
        out = np.where(np.isnan(out), 0.0, out)
    elif family.s == -1.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = math.sqrt(n) * (x - y) / np.sqrt(x * (1 - x))
        # x = 1 limit: the scale vanishes, sign follows x - y
        out = np.where(np.isnan(out), 0.0, out)
    else:
        out = signed_phi(family.s, n, x, y)
    return float(out) if out.ndim == 0 else out


def signed_phi(s, n, x, y):
    """One-sided phi statistic: +sqrt(2 n K_s) when y <= x, minus otherwise."""
    k = phi_divergence(s, x, y)
    v = np.sqrt(2.0 * n * k)
    return np.where(np.asarray(y) <= np.asarray(x), v, -v)


# ---- inverse boundary g(x, b) ------------------------------------------------

def g_inverse(family: GofFamily, n: int, x, b: float, iters: int = 80):
    """y = g(x, b) solving f(x, y) = b, clamped to [0, 1]; vectorised over x."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if family.kind == "ks":
        out = np.clip(x - b, 0.0, 1.0)
    elif family.s == 2.0:
        out = _g_hc2004(x, b / math.sqrt(n))
    elif family.s == -1.0:
        b0 = b / math.sqrt(n)
        out = np.clip(x - b0 * np.sqrt(x * (1 - x)), 0.0, 1.0)
    else:
        out = _g_bisect(family.s, n, x, b, iters)
    return float(out[0]) if scalar else out


def _g_hc2004(x, b0):
    # roots of (1 + b0^2) y^2 - (2x + b0^2) y + x^2 = 0
    c = 1.0 + b0 * b0
    disc = np.sqrt(np.maximum(b0 * b0 + 4.0 * x * (1.0 - x), 0.0))
    y_plus = (2.0 * x + b0 * b0 + abs(b0) * disc) / (2.0 * c)
    if b0 >= 0:
        with np.errstate(divide="ignore", invalid="ignore"):
            y = np.where(y_plus > 0, x * x / (c * y_plus), 0.0)
    else:
        y = y_plus
    return np.clip(y, 0.0, 1.0)


def _g_bisect(s, n, x, b, iters):
    # f(x, .) decreases in y; 80 halvings of the logit bracket leave a relative
    # width of ~1e-21 in y, down to y ~ 1e-300
    lo = np.full(x.shape, -700.0)
    hi = np.full(x.shape, 37.0)
    f_lo = signed_phi(s, n, x, expit(lo))
    f_hi = signed_phi(s, n, x, expit(hi))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        above = signed_phi(s, n, x, expit(mid)) > b
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    y = expit(0.5 * (lo + hi))
    y = np.where(f_lo <= b, 0.0, y)
    y = np.where(f_hi > b, 1.0, y)
    return y


# ---- domain and statistic ------------------------------------------------------

@dataclass(frozen=True)
class SupDomain:
    """Index/p-value truncation rectangle {k0 <= i <= k1} x {alpha0 <= p_(i) <= alpha1}."""

    k0: int = 1
    k1: int | None = None
    alpha0: float = 0.0
    alpha1: float = 1.0

    def __post_init__(self):
        if self.k0 < 1:
            raise ValueError("k0 must be >= 1")
        if self.k1 is not None and self.k1 < self.k0:
            raise ValueError("need k0 <= k1")
        if not 0.0 <= self.alpha0 <= self.alpha1 <= 1.0:
            raise ValueError("need 0 <= alpha0 <= alpha1 <= 1")

    @classmethod
    def default(cls, n: int) -> "SupDomain":
        return cls(1, max(1, n // 2))

    @classmethod
    def modified_hc(cls, n: int) -> "SupDomain":
        return cls(2, max(2, n // 2), 1.0 / n, 1.0)

    def resolve(self, n: int) -> "SupDomain":
        k1 = n if self.k1 is None else self.k1
        if k1 > n:
            raise ValueError(f"k1={k1} exceeds n={n}")
        return SupDomain(self.k0, k1, self.alpha0, self.alpha1)

    @property
    def index_only(self) -> bool:
        return self.alpha0 == 0.0 and self.alpha1 == 1.0

    def pvalue_only(self, n: int) -> bool:
        return self.k0 == 1 and self.resolve(n).k1 == n

    def to_str(self) -> str:
        s = f"{self.k0}:{'' if self.k1 is None else self.k1}"
        if not self.index_only:
            s += f",{self.alpha0!r}:{self.alpha1!r}"
        return s


def parse_domain(text: str | None, n: int) -> SupDomain:
    """``k0:k1[,a0:a1]``; empty parts take defaults k0=1, k1=n//2, a0=0, a1=1."""
    if text is None or text.strip() == "":
        return SupDomain.default(n)
    parts = text.split(",")
    if len(parts) > 2:
        raise ValueError(f"bad domain {text!r}")
    ks = parts[0].split(":")
    if len(ks) != 2:
        raise ValueError(f"bad index range {parts[0]!r}; expected k0:k1")
    k0 = int(ks[0]) if ks[0].strip() else 1
    k1 = int(ks[1]) if ks[1].strip() else max(1, n // 2)
    a0, a1 = 0.0, 1.0
    if len(parts) == 2:
        al = parts[1].split(":")
        if len(al) != 2:
            raise ValueError(f"bad p-value range {parts[1]!r}; expected a0:a1")
        a0 = _parse_prob(al[0], 0.0, n)
        a1 = _parse_prob(al[1], 1.0, n)
    return SupDomain(k0, k1, a0, a1).resolve(n)


def _parse_prob(t, default, n):
    t = t.strip()
    if not t:
        return default
    if t.endswith("/n"):
        return float(t[:-2]) / n
    return float(t)


@dataclass(frozen=True)
class StatResult:
    value: float
    argmax_index: int  # 1-based rank; 0 when the domain is empty
    empty_domain: bool


def _domain_mask(ps_sorted, dom: SupDomain):
    n = ps_sorted.shape[-1]
    i = np.arange(1, n + 1)
    mask = (i >= dom.k0) & (i <= dom.k1)
    return mask & (ps_sorted >= dom.alpha0) & (ps_sorted <= dom.alpha1)


def statistic(family: GofFamily, pvalues, domain: SupDomain | None = None) -> StatResult:
    p = np.sort(np.asarray(pvalues, dtype=float), kind="stable")
    n = p.size
    if n == 0:
        raise ValueError("need at least one p-value")
    dom = (domain or SupDomain.default(n)).resolve(n)
    mask = _domain_mask(p, dom)
    if not mask.any():
        return StatResult(-math.inf, 0, True)
    vals = np.where(mask, f_eval(family, n, np.arange(1, n + 1) / n, p), -np.inf)
    j = int(np.argmax(vals))
    return StatResult(float(vals[j]), j + 1, False)


def statistic_many(family: GofFamily, psorted: np.ndarray, domain: SupDomain) -> np.ndarray:
    """Row-wise statistic for a (reps, n) array of already sorted p-values."""
    n = psorted.shape[1]
    dom = domain.resolve(n)
    lo, hi = dom.k0 - 1, dom.k1
    x = np.arange(dom.k0, dom.k1 + 1) / n
    sub = psorted[:, lo:hi]
    vals = f_eval(family, n, x[None, :], sub)
    if not dom.index_only:
        vals = np.where((sub >= dom.alpha0) & (sub <= dom.alpha1), vals, -np.inf)
    return vals.max(axis=1)
