"""Distribution families, mixture hypotheses, p-values and the D-transform.

Component distributions are immutable dataclasses backed by frozen
``scipy.stats`` distributions.  Sampling draws come from the constructive
definitions (normal + chi-square composition for the noncentral families) so
that Monte Carlo results do not depend on quantile accuracy.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Union

import numpy as np
from scipy import stats
from scipy.optimize import brentq

P_CLAMP = 1e-15


class ModelError(ValueError):
    """Invalid model parameters or an unsupported model operation."""


class PValueClampWarning(UserWarning):
    """Some p-values were clamped into [1e-15, 1 - 1e-15]."""


class PvalueSide(str, Enum):
    ONE_SIDED = "one-sided"
    TWO_SIDED = "two-sided"

    @classmethod
    def parse(cls, v) -> "PvalueSide":
        if isinstance(v, cls):
            return v
        key = str(v).lower().replace("_", "-")
        aliases = {"one": "one-sided", "one-sided": "one-sided", "onesided": "one-sided",
                   "two": "two-sided", "two-sided": "two-sided", "twosided": "two-sided"}
        if key not in aliases:
            raise ModelError(f"unknown p-value side {v!r}")
        return cls(aliases[key])


class _Component:
    """Shared machinery; subclasses supply ``_frozen`` and ``sample``."""

    family: str = ""
    symmetric: bool = False

    @cached_property
    def _frozen(self):  # pragma: no cover - overridden
        raise NotImplementedError

    def cdf(self, x):
        return self._frozen.cdf(x)

    def sf(self, x):
        return self._frozen.sf(x)

    def ppf(self, q):
        return self._polish(self._frozen.ppf(q), q, upper=False)

    def isf(self, q):
        return self._polish(self._frozen.isf(q), q, upper=True)

    def _polish(self, x0, q, upper):
        # one safeguarded root refinement where the library inverse is loose
        x0 = np.asarray(x0, dtype=float)
        q = np.asarray(q, dtype=float)
        fn = self.sf if upper else self.cdf
        bad = np.isfinite(x0) & (np.abs(fn(x0) - q) > 1e-12 * np.maximum(q, 1e-300) + 1e-14)
        if not np.any(bad):
            return x0 if x0.ndim else float(x0)
        out = x0.copy()
        for idx in zip(*np.nonzero(np.atleast_1d(bad))):
            xi = float(np.atleast_1d(x0)[idx])
            qi = float(np.atleast_1d(q)[idx])
            scale = max(1.0, abs(xi)) * 1e-3
            lo, hi = xi - scale, xi + scale
            g = (lambda t: fn(t) - qi)
            while np.sign(g(lo)) == np.sign(g(hi)):
                lo, hi = lo - 2 * (hi - lo), hi + 2 * (hi - lo)
            root = brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
            np.atleast_1d(out)[idx] = root
        return out if out.ndim else float(out)

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Normal(_Component):
    mu: float = 0.0
    sigma: float = 1.0
    family = "normal"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ModelError("sigma must be > 0")

    @property
    def symmetric(self):
        return self.mu == 0.0

    @cached_property
    def _frozen(self):
        return stats.norm(loc=self.mu, scale=self.sigma)

    def sample(self, rng, size):
        return self.mu + self.sigma * rng.standard_normal(size)

    def to_dict(self):
        return {"family": "normal", "mu": self.mu, "sigma": self.sigma}


@dataclass(frozen=True)
class StudentT(_Component):
    nu: float = 1.0
    delta: float = 0.0
    family = "t"

    def __post_init__(self):
        if not self.nu > 0:
            raise ModelError("nu must be > 0")
        if not self.delta >= 0:
            raise ModelError("delta must be >= 0")

    @property
    def symmetric(self):
        return self.delta == 0.0

    @cached_property
    def _frozen(self):
        if self.delta == 0.0:
            return stats.t(df=self.nu)
        return stats.nct(df=self.nu, nc=self.delta)

    def sample(self, rng, size):
        z = rng.standard_normal(size) + self.delta
        w = rng.chisquare(self.nu, size)
        return z / np.sqrt(w / self.nu)

    def to_dict(self):
        return {"family": "t", "nu": self.nu, "delta": self.delta}


@dataclass(frozen=True)
class ChiSquare(_Component):
    nu: float = 1.0
    delta: float = 0.0
    family = "chisq"

    def __post_init__(self):
        if not self.nu > 0:
            raise ModelError("nu must be > 0")
        if not self.delta >= 0:
            raise ModelError("delta must be >= 0")

    @cached_property
    def _frozen(self):
        if self.delta == 0.0:
            return stats.chi2(df=self.nu)
        return stats.ncx2(df=self.nu, nc=self.delta)

    def sample(self, rng, size):
        if self.delta == 0.0:
            return rng.chisquare(self.nu, size)
        return rng.noncentral_chisquare(self.nu, self.delta, size)

    def to_dict(self):
        return {"family": "chisq", "nu": self.nu, "delta": self.delta}


@dataclass(frozen=True)
class Exponential(_Component):
    """Exponential with rate ``nu`` (mean 1/nu); ``scale=True`` reads nu as the mean."""

    nu: float = 1.0
    scale: bool = False
    family = "exp"

    def __post_init__(self):
        if not self.nu > 0:
            raise ModelError("nu must be > 0")

    @property
    def mean(self):
        return self.nu if self.scale else 1.0 / self.nu

    @cached_property
    def _frozen(self):
        return stats.expon(scale=self.mean)

    def sample(self, rng, size):
        return self.mean * rng.standard_exponential(size)

    def to_dict(self):
        d = {"family": "exp", "nu": self.nu}
        if self.scale:
            d["scale"] = True
        return d


@dataclass(frozen=True)
class GenNormal(_Component):
    """Generalized normal with density exp(-|x-mu|^p / (p sigma^p)) / C_p.

    C_p = 2 p^{1/p} Gamma(1 + 1/p) sigma, so p = 2 is N(mu, sigma^2).
    """

    p: float = 2.0
    mu: float = 0.0
    sigma: float = 1.0
    family = "gennormal"

    def __post_init__(self):
        if not self.p > 0:
            raise ModelError("p must be > 0")
        if not self.sigma > 0:
            raise ModelError("sigma must be > 0")

    @property
    def symmetric(self):
        return self.mu == 0.0

    @cached_property
    def _frozen(self):
        return stats.gennorm(beta=self.p, loc=self.mu, scale=self.sigma * self.p ** (1.0 / self.p))

    def sample(self, rng, size):
        g = rng.standard_gamma(1.0 / self.p, size)
        sgn = np.where(rng.random(size) < 0.5, -1.0, 1.0)
        return self.mu + sgn * self.sigma * (self.p * g) ** (1.0 / self.p)

    def to_dict(self):
        return {"family": "gennormal", "p": self.p, "mu": self.mu, "sigma": self.sigma}


ComponentDist = Union[Normal, StudentT, ChiSquare, Exponential, GenNormal]


@dataclass(frozen=True)
class MixtureModel:
    """(1 - epsilon) * null_component + epsilon * signal_component."""

    epsilon: float
    null_component: ComponentDist = field(default_factory=Normal)
    signal_component: ComponentDist = field(default_factory=Normal)

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ModelError("epsilon must lie in [0, 1]")

    def cdf(self, x):
        e = self.epsilon
        if e == 0.0:
            return self.null_component.cdf(x)
        return (1 - e) * self.null_component.cdf(x) + e * self.signal_component.cdf(x)

    def sf(self, x):
        e = self.epsilon
        if e == 0.0:
            return self.null_component.sf(x)
        return (1 - e) * self.null_component.sf(x) + e * self.signal_component.sf(x)

    def sample(self, rng, size, signal_rng=None):
        """Draw from the mixture.

        Null draws always consume ``rng`` exactly as the null component alone
        would, so epsilon = 0 reproduces the null stream bit for bit.  Signal
        labels and signal values come from ``signal_rng``.
        """
        x = self.null_component.sample(rng, size)
        if self.epsilon == 0.0:
            return x
        srng = signal_rng if signal_rng is not None else rng
        is_sig = srng.random(size) < self.epsilon
        m = int(is_sig.sum())
        if m:
            x[is_sig] = self.signal_component.sample(srng, m)
        return x

    def to_dict(self):
        d = dict(self.null_component.to_dict())
        d["epsilon"] = self.epsilon
        d["signal"] = self.signal_component.to_dict()
        return d


@dataclass(frozen=True)
class ArwParams:
    """Asymptotically rare/weak parameterisation: eps = n^-alpha, mu = sqrt(2 r log n)."""

    alpha: float
    r: float
    n: int

    def __post_init__(self):
        if not 0.5 < self.alpha < 1.0:
            raise ModelError("alpha must lie in (1/2, 1)")
        if self.r < 0 or self.n < 2:
            raise ModelError("need r >= 0 and n >= 2")

    @property
    def epsilon(self) -> float:
        return self.n ** (-self.alpha)

    @property
    def mu(self) -> float:
        return math.sqrt(2.0 * self.r * math.log(self.n))

    def mixture(self) -> MixtureModel:
        return MixtureModel(self.epsilon, Normal(0.0, 1.0), Normal(self.mu, 1.0))


# ---- module-level operations ------------------------------------------------

def cdf(dist, x):
    return dist.cdf(x)


def quantile(dist, q):
    qa = np.asarray(q, dtype=float)
    if np.any(~((qa > 0) & (qa < 1))):
        raise ModelError("quantile requires q in (0, 1)")
    return dist.ppf(q)


def transform_D(f0, h1, side, x):
    """CDF of one p-value under the operative hypothesis, evaluated at x.

    ``h1=None`` means the null, where D is the identity.  One-sided p-values
    give D(x) = 1 - F1(F0^{-1}(1 - x)); two-sided give F1bar(q) + F1(-q) with
    q = F0^{-1}(1 - x/2), which needs a null symmetric about zero.
    """
    side = PvalueSide.parse(side)
    xa = np.asarray(x, dtype=float)
    if np.any(~((xa >= 0) & (xa <= 1))):
        raise ModelError("transform_D requires x in [0, 1]")
    if side is PvalueSide.TWO_SIDED and not f0.symmetric:
        raise ModelError("two-sided p-values need a null distribution symmetric about 0")
    if h1 is None or (isinstance(h1, MixtureModel) and h1.epsilon == 0.0
                      and h1.null_component == f0):
        out = xa.copy()
    elif side is PvalueSide.ONE_SIDED:
        with np.errstate(over="ignore", invalid="ignore"):
            t = f0.isf(xa)
        out = h1.sf(t)
        out = np.where(xa <= 0, 0.0, np.where(xa >= 1, 1.0, out))
    else:
        with np.errstate(over="ignore", invalid="ignore"):
            t = f0.isf(xa / 2.0)
        out = h1.sf(t) + h1.cdf(-t)
        out = np.where(xa <= 0, 0.0, np.where(xa >= 1, 1.0, out))
    out = np.clip(out, 0.0, 1.0)
    return float(out) if np.ndim(x) == 0 else out


def pvalues_from_stats(xs, f0, side, clamp=True):
    """Element-wise p-values of raw statistics under the null f0."""
    side = PvalueSide.parse(side)
    xa = np.asarray(xs, dtype=float)
    if xa.size == 0:
        raise ModelError("need at least one statistic")
    if side is PvalueSide.ONE_SIDED:
        p = f0.sf(xa)
    else:
        if not f0.symmetric:
            raise ModelError("two-sided p-values need a null distribution symmetric about 0")
        p = np.minimum(2.0 * f0.sf(np.abs(xa)), 1.0)
    if clamp:
        c = np.clip(p, P_CLAMP, 1.0 - P_CLAMP)
        if np.any(c != p):
            warnings.warn("p-values clamped into [1e-15, 1-1e-15]", PValueClampWarning, stacklevel=2)
        p = c
    return p


def null_of(model):
    """The null component of a model (the model itself for a plain component)."""
    return model.null_component if isinstance(model, MixtureModel) else model


# ---- JSON / inline config ---------------------------------------------------

_FAMILIES = {"normal": Normal, "t": StudentT, "chisq": ChiSquare, "exp": Exponential,
             "gennormal": GenNormal}


def component_from_dict(d: dict):
    d = dict(d)
    fam = d.pop("family", None)
    if fam not in _FAMILIES:
        raise ModelError(f"unknown family {fam!r}; expected one of {sorted(_FAMILIES)}")
    d.pop("epsilon", None)
    d.pop("signal", None)
    try:
        return _FAMILIES[fam](**d)
    except TypeError as e:
        raise ModelError(str(e)) from None


def model_from_dict(d: dict):
    """Component or mixture from the JSON config schema.

    {"family": "normal", "mu": 0, "sigma": 1, "epsilon": 0.1,
     "signal": {"family": "normal", "mu": 1, "sigma": 1}}
    """
    null = component_from_dict(d)
    if "signal" not in d and "epsilon" not in d:
        return null
    if "signal" not in d:
        raise ModelError("a mixture needs a 'signal' component")
    return MixtureModel(float(d.get("epsilon", 0.0)), null, component_from_dict(d["signal"]))


def model_to_dict(m) -> dict:
    return m.to_dict()
