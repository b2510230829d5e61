"""Numerical primitives: log-gamma, incomplete beta/gamma, Poisson mass, h_k.

The regularized incomplete beta and gamma functions are thin, validated
wrappers around ``scipy.special`` (Cephes/Boost implementations).  Everything
else the recursions need (log-scaled numbers, compensated sums) lives here too.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp


class DomainError(ValueError):
    """Argument outside the mathematical domain of a special function."""


def _check_prob(x, name="x"):
    x = np.asarray(x, dtype=float)
    if np.any(~(x >= 0.0)) or np.any(x > 1.0):
        raise DomainError(f"{name} must lie in [0, 1]")
    return x


def _scalar_or_array(out, *args):
    if all(np.ndim(a) == 0 for a in args):
        return float(out)
    return out


def log_gamma(x):
    """ln Gamma(x) for x > 0."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0.0)):
        raise DomainError("log_gamma requires x > 0")
    return _scalar_or_array(_sp.gammaln(arr), x)


def log_factorial(k):
    """ln k! for integer k >= 0 (vectorised)."""
    k = np.asarray(k)
    if np.any(k < 0):
        raise DomainError("log_factorial requires k >= 0")
    return _scalar_or_array(_sp.gammaln(k + 1.0), k)


def log_factorial_table(n: int) -> np.ndarray:
    """Array t with t[m] = ln m! for m = 0..n."""
    return _sp.gammaln(np.arange(n + 1, dtype=float) + 1.0)


def beta_cdf(x, a, b):
    """Regularized incomplete beta I_x(a, b)."""
    xa = _check_prob(x)
    if np.any(np.asarray(a) <= 0) or np.any(np.asarray(b) <= 0):
        raise DomainError("beta shapes must be positive")
    return _scalar_or_array(_sp.betainc(a, b, xa), x, a, b)


def beta_sf(x, a, b):
    """Survival function of Beta(a, b) at x, i.e. 1 - I_x(a, b).

    Evaluated as I_{1-x}(b, a) so the upper tail keeps full relative accuracy.
    """
    xa = _check_prob(x)
    if np.any(np.asarray(a) <= 0) or np.any(np.asarray(b) <= 0):
        raise DomainError("beta shapes must be positive")
    return _scalar_or_array(_sp.betainc(b, a, 1.0 - xa), x, a, b)


# scipy's incomplete gamma loses accuracy for subnormal-scale shapes
_TINY_SHAPE = 1e-250


def _gamma_args(x, shape):
    xa = np.asarray(x, dtype=float)
    sa = np.asarray(shape, dtype=float)
    if np.any(~(xa >= 0.0)):
        raise DomainError("gamma argument must be >= 0")
    if np.any(~(sa >= 0.0)):
        raise DomainError("gamma shape must be >= 0")
    return xa, sa


def gamma_cdf(x, shape):
    """CDF of Gamma(shape, scale=1) at x; shape 0 is a point mass at 0."""
    xa, sa = _gamma_args(x, shape)
    tiny = sa < _TINY_SHAPE
    with np.errstate(invalid="ignore", over="ignore"):
        out = _sp.gammainc(np.where(tiny, 1.0, sa), xa)
        # shape -> 0: F = 1 - shape * E1(x) + O(shape^2); shape 0 itself is a point mass
        lim = np.where(sa == 0.0, 1.0, np.where(xa > 0, 1.0 - sa * _sp.exp1(xa), 0.0))
    return _scalar_or_array(np.clip(np.where(tiny, lim, out), 0.0, 1.0), x, shape)


def gamma_sf(x, shape):
    """Survival function of Gamma(shape, scale=1); shape 0 gives 0."""
    xa, sa = _gamma_args(x, shape)
    tiny = sa < _TINY_SHAPE
    with np.errstate(invalid="ignore", over="ignore"):
        out = _sp.gammaincc(np.where(tiny, 1.0, sa), xa)
        lim = np.where(sa == 0.0, 0.0, np.where(xa > 0, sa * _sp.exp1(xa), 1.0))
    return _scalar_or_array(np.clip(np.where(tiny, lim, out), 0.0, 1.0), x, shape)


def h(k, x):
    """h_k(x) = x F_{Gamma(k-1)}(kx) - F_{Gamma(k)}(kx) for integer k >= 1."""
    ka = np.asarray(k)
    xa = np.asarray(x, dtype=float)
    if np.any(ka < 1):
        raise DomainError("h requires k >= 1")
    if np.any(~(xa >= 0.0)):
        raise DomainError("h requires x >= 0")
    kx = ka * xa
    out = xa * gamma_cdf(kx, ka - 1) - gamma_cdf(kx, ka)
    return _scalar_or_array(out, k, x)


def poisson_pmf(k, lam):
    """e^{-lam} lam^k / k!, evaluated in log space."""
    ka = np.asarray(k)
    la = np.asarray(lam, dtype=float)
    if np.any(ka < 0):
        raise DomainError("poisson_pmf requires k >= 0")
    if np.any(~(la >= 0.0)):
        raise DomainError("poisson_pmf requires lambda >= 0")
    logp = _sp.xlogy(ka, la) - la - _sp.gammaln(ka + 1.0)
    return _scalar_or_array(np.exp(logp), k, lam)


def poisson_cdf(k, lam):
    """P(Poisson(lam) <= k) for integer k >= 0."""
    return gamma_sf(lam, np.asarray(k) + 1.0)


@dataclass(frozen=True)
class LogScaled:
    """A real number stored as sign * exp(log_magnitude)."""

    sign: int
    log_magnitude: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0 or +1")
        if self.sign != 0 and not math.isfinite(self.log_magnitude):
            raise ValueError("log_magnitude must be finite for a nonzero value")
        if self.sign == 0 and self.log_magnitude != -math.inf:
            object.__setattr__(self, "log_magnitude", -math.inf)

    @classmethod
    def from_float(cls, v: float) -> "LogScaled":
        if v == 0.0:
            return cls(0, -math.inf)
        return cls(1 if v > 0 else -1, math.log(abs(v)))

    @classmethod
    def from_log(cls, logv: float, sign: int = 1) -> "LogScaled":
        if logv == -math.inf:
            return cls(0, -math.inf)
        return cls(sign, logv)

    def to_float(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)

    def __mul__(self, other: "LogScaled") -> "LogScaled":
        s = self.sign * other.sign
        if s == 0:
            return LogScaled(0, -math.inf)
        return LogScaled(s, self.log_magnitude + other.log_magnitude)

    def __add__(self, other: "LogScaled") -> "LogScaled":
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        big, small = (self, other) if self.log_magnitude >= other.log_magnitude else (other, self)
        r = math.exp(small.log_magnitude - big.log_magnitude)
        if big.sign == small.sign:
            return LogScaled(big.sign, big.log_magnitude + math.log1p(r))
        if r == 1.0:
            return LogScaled(0, -math.inf)
        return LogScaled(big.sign, big.log_magnitude + math.log1p(-r))

    def __neg__(self) -> "LogScaled":
        return LogScaled(-self.sign, self.log_magnitude)

    def __sub__(self, other: "LogScaled") -> "LogScaled":
        return self + (-other)


def compensated_sum(values) -> float:
    """Correctly rounded floating-point sum (Shewchuk, via math.fsum)."""
    return math.fsum(np.asarray(values, dtype=float).ravel().tolist())
