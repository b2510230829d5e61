"""P-values, critical values, power and power sweeps."""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from scipy.optimize import brentq

from . import approx
from .exact import boundary_u, exact_cdf, select_route
from .gof import GofFamily, SupDomain, parse_domain, parse_family
from .models import ArwParams, MixtureModel, Normal, PvalueSide, model_from_dict, null_of
from .montecarlo import SimConfig, default_threads, empirical_sf, sample_stats

_ROUTES = ("index", "pvalue", "modified", "general")
KINDS = ("exact-auto",) + _ROUTES + ("gamma", "poisson", "mc")


@dataclass(frozen=True)
class MethodChoice:
    """How to evaluate a distribution.

    exact-auto picks the cheapest exact recursion for the domain; index,
    pvalue, modified and general force one; gamma and poisson are the
    approximations; mc simulates with ``reps`` and ``seed``.
    """

    kind: str = "exact-auto"
    reps: int = 100_000
    seed: int = 0
    precision: object = "auto"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown method {self.kind!r}; expected one of {KINDS}")

    @classmethod
    def parse(cls, text: str | None) -> "MethodChoice":
        """'exact', 'exact-auto', 'index', 'gamma', 'poisson', 'mc', 'mc:reps=1000,seed=3'."""
        if text is None:
            return cls()
        kind, _, rest = text.strip().lower().partition(":")
        kind = {"exact": "exact-auto", "auto": "exact-auto"}.get(kind, kind)
        kw = {}
        for item in filter(None, rest.split(",")):
            key, _, val = item.partition("=")
            if key not in ("reps", "seed"):
                raise ValueError(f"unknown method option {key!r}")
            kw[key] = int(val)
        return cls(kind, **kw)

    @property
    def is_exact(self) -> bool:
        return self.kind in ("exact-auto",) + tuple(_ROUTES)

    def label(self, domain: SupDomain, n: int) -> str:
        if self.kind == "exact-auto":
            return select_route(domain, n)
        if self.kind == "mc":
            return f"mc:reps={self.reps},seed={self.seed}"
        return self.kind


EXACT = MethodChoice()


def _h1_parts(h1):
    if h1 is None:
        return None, None
    return null_of(h1), h1


def sf_at(family: GofFamily, domain: SupDomain | None, n: int, b: float,
          method: MethodChoice = EXACT, h1=None, side=PvalueSide.TWO_SIDED,
          threads: int | None = None) -> float:
    """P(S >= b) under the null (h1=None) or under h1."""
    dom = (domain or SupDomain.default(n)).resolve(n)
    if b == math.inf:
        return 0.0
    if b == -math.inf:
        return 1.0
    f0, hh = _h1_parts(h1)
    if method.kind == "mc":
        model = h1 if h1 is not None else Normal()
        s = sample_stats(model, family, dom, n, SimConfig(method.reps, method.seed), side, threads)
        return empirical_sf(s, b).value
    if method.kind == "poisson":
        return approx.sf_poisson_tail(family, n, b, dom, f0, hh, side)
    bv = boundary_u(family, n, b, dom, f0, hh, side)
    if method.kind == "gamma":
        return approx.cdf_gamma_approx(bv).sf
    route = "auto" if method.kind == "exact-auto" else method.kind
    return exact_cdf(bv, route, method.precision).sf


def pvalue(family: GofFamily, domain: SupDomain | None, n: int, observed: float,
           method: MethodChoice = EXACT) -> float:
    """Null survival probability at the observed statistic."""
    if math.isnan(observed):
        raise ValueError("observed statistic is NaN")
    return sf_at(family, domain, n, observed, method)


def critical_value(family: GofFamily, domain: SupDomain | None, n: int, level: float,
                   method: MethodChoice = EXACT, xtol: float = 1e-10) -> float:
    """Smallest b with SF_H0(b) <= level (to ``xtol`` in b)."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    dom = (domain or SupDomain.default(n)).resolve(n)
    if method.kind == "mc":
        s = sorted(sample_stats(Normal(), family, dom, n, SimConfig(method.reps, method.seed)))
        # smallest sample value b with #(s >= b) / reps <= level, nudged above ties
        j = len(s) - math.floor(level * len(s))
        return s[j] if j < len(s) else math.nextafter(s[-1], math.inf)

    def excess(b):
        return sf_at(family, dom, n, b, method) - level

    lo, hi = 0.0, 1.0
    while excess(hi) > 0:
        lo, hi = hi, 2.0 * hi + 1.0
        if hi > 1e12:
            raise ArithmeticError("could not bracket the critical value")
    while excess(lo) <= 0:
        lo, hi = 2.0 * lo - 1.0 if lo <= 0 else 0.0, lo
        if lo < -1e12:
            raise ArithmeticError("could not bracket the critical value")
    b = brentq(excess, lo, hi, xtol=xtol, rtol=4 * 2.0 ** -52)
    # brentq may land on either side; step up until the level is respected
    step = xtol
    while excess(b) > 0:
        b += step
        step *= 2
    return b


def power(family: GofFamily, domain: SupDomain | None, n: int, level: float, h1,
          side=PvalueSide.TWO_SIDED, method: MethodChoice = EXACT,
          threads: int | None = None) -> float:
    """SF under h1 at the null critical value.

    The critical value always comes from the exact null distribution so that
    approximate or simulated power is compared at the same threshold.
    """
    b = critical_value(family, domain, n, level, EXACT if not method.is_exact else method)
    return min(max(sf_at(family, domain, n, b, method, h1, side, threads), 0.0), 1.0)


def detection_boundary(alpha: float) -> float:
    """rho*(alpha): alpha - 1/2 up to 3/4, then (1 - sqrt(1 - alpha))^2."""
    if not 0.5 < alpha < 1.0:
        raise ValueError("alpha must lie in (1/2, 1)")
    if alpha <= 0.75:
        return alpha - 0.5
    return (1.0 - math.sqrt(1.0 - alpha)) ** 2


# ---- sweeps -------------------------------------------------------------------

SWEEP_COLUMNS = ["family", "s", "n", "k0", "k1", "alpha0", "alpha1", "level",
                 "epsilon", "mu", "alpha", "r", "model", "power", "method", "flags"]


def _as_list(v):
    return v if isinstance(v, list) else [v]


def _model_cell(entry: dict, n: int):
    """(mixture, parameter columns) from one sweep model entry."""
    if "alpha" in entry:
        alpha = float(entry["alpha"])
        r = float(entry["r"]) if "r" in entry else float(entry.get("r_factor", 1.0)) * detection_boundary(alpha)
        arw = ArwParams(alpha, r, n)
        return arw.mixture(), {"epsilon": arw.epsilon, "mu": arw.mu, "alpha": alpha, "r": r}
    if "model" in entry:
        m = model_from_dict(entry["model"])
        if not isinstance(m, MixtureModel):
            m = MixtureModel(0.0, m, m)
        return m, {"epsilon": m.epsilon, "model": m.to_dict()}
    eps, mu = float(entry["epsilon"]), float(entry["mu"])
    return MixtureModel(eps, Normal(), Normal(mu, 1.0)), {"epsilon": eps, "mu": mu}


def expand_sweep(grid: dict) -> list[dict]:
    """Grid cells in a fixed order: family, n, domain, level, model."""
    fams = _as_list(grid.get("family", "hc2004"))
    ns = _as_list(grid["n"])
    doms = _as_list(grid.get("domain", ""))
    levels = _as_list(grid.get("level", 0.05))
    models = _as_list(grid["models"])
    cells = []
    for fam, n, dom, level, model in itertools.product(fams, ns, doms, levels, models):
        cells.append({"family": fam, "n": int(n), "domain": dom, "level": float(level),
                      "model": model})
    return cells


def _run_cell(cell: dict, method: MethodChoice, side) -> dict:
    n = cell["n"]
    row = dict.fromkeys(SWEEP_COLUMNS, "")
    flags = []
    try:
        fam = parse_family(str(cell["family"]))
        dom = parse_domain(cell["domain"] or None, n)
        row.update(family=fam.name, s="" if fam.kind == "ks" else fam.s, n=n, k0=dom.k0,
                   k1=dom.k1, alpha0=dom.alpha0, alpha1=dom.alpha1, level=cell["level"])
        h1, cols = _model_cell(cell["model"], n)
        row.update(cols)
        row["method"] = method.label(dom, n)
        row["power"] = power(fam, dom, n, cell["level"], h1, side, method, threads=1)
    except (ValueError, ArithmeticError) as e:
        flags.append(f"error:{type(e).__name__}:{e}")
        row["power"] = float("nan")
    row["flags"] = ";".join(flags)
    return row


def power_sweep(grid: dict, threads: int | None = None) -> list[dict]:
    """One row per grid cell, in grid order; per-cell errors land in ``flags``."""
    method = MethodChoice.parse(grid.get("method"))
    side = PvalueSide.parse(grid.get("side", "two-sided"))
    cells = expand_sweep(grid)
    threads = default_threads() if threads is None else max(1, threads)
    if threads == 1:
        return [_run_cell(c, method, side) for c in cells]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(lambda c: _run_cell(c, method, side), cells))
