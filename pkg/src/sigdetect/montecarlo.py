"""Seeded simulation of supremum statistics under any model."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .gof import GofFamily, SupDomain, statistic_many
from .models import P_CLAMP, PvalueSide, null_of, pvalues_from_stats


@dataclass(frozen=True)
class SimConfig:
    reps: int = 5000
    seed: int = 0
    chunk: int = 1000

    def __post_init__(self):
        if self.reps < 1 or self.chunk < 1:
            raise ValueError("reps and chunk must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def n_chunks(self) -> int:
        return -(-self.reps // self.chunk)


def chunk_rngs(cfg: SimConfig, index: int):
    """(null stream, signal stream) for one chunk.

    Philox is counter based, and each chunk is keyed by (seed, chunk index),
    so any split of the chunks over workers yields the same draws.
    """
    base = [cfg.seed & 0xFFFFFFFF, cfg.seed >> 32, index]
    null = np.random.Generator(np.random.Philox(np.random.SeedSequence(base + [0])))
    sig = np.random.Generator(np.random.Philox(np.random.SeedSequence(base + [1])))
    return null, sig


def default_threads() -> int:
    env = os.environ.get("SIGDETECT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _draw(model, rows, n, rng, srng):
    if hasattr(model, "epsilon"):
        return model.sample(rng, (rows, n), signal_rng=srng)
    return model.sample(rng, (rows, n))


def sample_stats(model, family: GofFamily, domain: SupDomain | None, n: int, cfg: SimConfig,
                 side=PvalueSide.TWO_SIDED, threads: int | None = None) -> np.ndarray:
    """``cfg.reps`` statistic values, each from n i.i.d. draws converted to null p-values."""
    dom = (domain or SupDomain.default(n)).resolve(n)
    f0 = null_of(model)
    side = PvalueSide.parse(side)

    def one(c):
        rows = min(cfg.chunk, cfg.reps - c * cfg.chunk)
        rng, srng = chunk_rngs(cfg, c)
        x = _draw(model, rows, n, rng, srng)
        p = np.clip(pvalues_from_stats(x, f0, side, clamp=False), P_CLAMP, 1.0 - P_CLAMP)
        p.sort(axis=1)
        return statistic_many(family, p, dom)

    threads = default_threads() if threads is None else max(1, threads)
    if threads == 1 or cfg.n_chunks == 1:
        parts = [one(c) for c in range(cfg.n_chunks)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(one, range(cfg.n_chunks)))  # map keeps chunk order
    return np.concatenate(parts)


@dataclass(frozen=True)
class EmpiricalSF:
    value: float
    se: float
    reps: int

    def __float__(self):
        return self.value


def empirical_sf(samples, b: float) -> EmpiricalSF:
    """Fraction of samples >= b with its binomial standard error."""
    s = np.asarray(samples, dtype=float)
    if s.size == 0:
        raise ValueError("need at least one sample")
    p = float(np.count_nonzero(s >= b)) / s.size
    return EmpiricalSF(p, math.sqrt(p * (1.0 - p) / s.size), s.size)


def empirical_sf_curve(samples, bs) -> np.ndarray:
    s = np.sort(np.asarray(samples, dtype=float))
    return 1.0 - np.searchsorted(s, np.asarray(bs, dtype=float), side="left") / s.size


def dump_samples(path, samples) -> None:
    np.asarray(samples, dtype="<f8").tofile(path)


def load_samples(path) -> np.ndarray:
    return np.fromfile(path, dtype="<f8")
