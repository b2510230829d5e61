import math
import time

import gmpy2
import numpy as np
import pytest

from oracles import binom_se, quad_cdf
from sigdetect import exact as E
from sigdetect import gof as G
from sigdetect import models as M
from sigdetect.montecarlo import SimConfig, empirical_sf, sample_stats

FAMS = [G.KS_PLUS, G.HC2004, G.BERK_JONES, G.REVERSE_BERK_JONES, G.HC2008]
H1 = M.MixtureModel(0.3, M.Normal(), M.Normal(1.5, 1.0))


class TestWorkedValues:
    def test_n2_ks(self):
        bv = E.boundary_u(G.KS_PLUS, 2, 0.25, G.SupDomain(1, 2))
        assert E.cdf_index_trunc(bv).cdf == pytest.approx(0.3125, abs=1e-15)

    def test_trivial_boundaries(self):
        assert E.cdf_index_trunc(np.zeros(5), n=5).cdf == 1.0
        assert E.cdf_index_trunc([0.1, 0.2, 1.0], n=3).cdf == 0.0

    def test_table_cell_n10(self):
        bv = E.boundary_u(G.HC2004, 10, 4.648, G.SupDomain(1, 5))
        assert E.cdf_index_trunc(bv).sf == pytest.approx(0.05, abs=5e-4)

    def test_n1_with_window(self):
        # p in [0.5, 1] is the only constrained region; KS+ at b=0.2 needs p >= 0.8 there
        bv = E.boundary_u(G.KS_PLUS, 1, 0.2, G.SupDomain(1, 1, 0.5, 1.0))
        assert E.exact_cdf(bv).cdf == pytest.approx(0.7, abs=1e-14)
        assert E.cdf_general(bv).cdf == pytest.approx(0.7, abs=1e-14)


class TestBoundary:
    def test_ks_null(self):
        n, b = 8, 0.2
        bv = E.boundary_u(G.KS_PLUS, n, b, G.SupDomain(1, 8, 0.05, 1.0))
        k = np.arange(1, 9)
        assert np.allclose(bv.u, np.maximum.reduce([k / n - b, np.full(8, 0.05), np.zeros(8)]))

    def test_large_b_gives_one(self):
        bv = E.boundary_u(G.KS_PLUS, 20, 2.0)
        assert np.all(bv.u == 0.0)
        assert E.exact_cdf(bv).cdf == 1.0
        # HC's g only tends to 0, so the CDF tends to 1
        assert E.exact_cdf(E.boundary_u(G.HC2004, 20, 1e12)).cdf == pytest.approx(1.0, abs=1e-12)

    def test_hc_closed_form(self):
        n, b0 = 50, 0.4
        bv = E.boundary_u(G.HC2004, n, math.sqrt(n) * b0)
        x = np.arange(1, 26) / n
        r = np.sqrt(b0 ** 2 + 4 * x * (1 - x))
        g = (x + (b0 ** 2 - b0 * r) / 2) / (1 + b0 ** 2)
        assert np.allclose(bv.u, g, rtol=1e-13, atol=1e-16)

    def test_invalid(self):
        with pytest.raises(ValueError):
            E.BoundaryVector(np.array([0.1, 1.5]), 2, G.SupDomain(1, 2))


def _random_cases(seed, count, nmax):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(1, nmax + 1))
        fam = FAMS[int(rng.integers(len(FAMS)))]
        k0 = int(rng.integers(1, n + 1))
        k1 = int(rng.integers(k0, n + 1))
        a0 = float(rng.choice([0.0, rng.uniform(0, 0.3)]))
        a1 = float(rng.choice([1.0, rng.uniform(0.5, 1.0)]))
        b = float(rng.uniform(-0.5, 0.5) if fam == G.KS_PLUS else rng.uniform(-1, 4))
        yield n, fam, G.SupDomain(k0, k1, a0, a1), b


class TestQuadratureOracle:
    @pytest.mark.parametrize("h1", [None, H1], ids=["H0", "H1"])
    def test_random_small_n(self, h1):
        done = 0
        for n, fam, dom, b in _random_cases(3 if h1 is None else 4, 40, 3):
            f0 = M.Normal() if h1 is not None else None
            try:
                bv = E.boundary_u(fam, n, b, dom, f0, h1)
            except ValueError:
                continue
            ref = quad_cdf(fam, n, b, dom, h1)
            assert E.exact_cdf(bv).cdf == pytest.approx(ref, abs=1e-7), (n, fam, dom, b)
            assert E.cdf_general(bv).cdf == pytest.approx(ref, abs=1e-7), (n, fam, dom, b)
            done += 1
        assert done >= 30

    def test_each_route_n3(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            b = float(rng.uniform(0.3, 3))
            cases = [("index", G.SupDomain(2, 3)), ("pvalue", G.SupDomain(1, 3, 0.1, 0.8)),
                     ("modified", G.SupDomain(1, 2, 0.2, 1.0)), ("general", G.SupDomain(2, 3, 0.05, 0.9))]
            for route, dom in cases:
                bv = E.boundary_u(G.BERK_JONES, 3, b, dom)
                ref = quad_cdf(G.BERK_JONES, 3, b, dom)
                assert E.exact_cdf(bv, route).cdf == pytest.approx(ref, abs=1e-7), (route, b)


class TestReductions:
    def test_random(self):
        worst = 0.0
        for n, fam, dom, b in _random_cases(21, 40, 40):
            try:
                bv = E.boundary_u(fam, n, b, dom)
            except ValueError:
                continue
            gen = E.cdf_general(bv).cdf
            for route in ("index", "pvalue", "modified"):
                try:
                    other = E.exact_cdf(bv, route).cdf
                except ValueError:
                    continue
                worst = max(worst, abs(gen - other))
        assert worst <= 1e-9

    def test_modified_alpha0_limit(self):
        n, b = 30, 2.5
        idx = E.exact_cdf(E.boundary_u(G.HC2004, n, b, G.SupDomain(2, 15))).cdf
        mod = E.cdf_modified(E.boundary_u(G.HC2004, n, b, G.SupDomain(2, 15, 1e-12, 1.0))).cdf
        assert mod == pytest.approx(idx, abs=1e-6)

    def test_pvalue_full_window_low_b(self):
        # every rank constrained and g = 1 everywhere: the event is impossible
        bv = E.boundary_u(G.KS_PLUS, 6, -2.0, G.SupDomain(1, 6))
        assert E.cdf_pvalue_trunc(bv).cdf == 0.0

    def test_pvalue_window_low_b_keeps_empty_mass(self):
        # with a window only samples missing it satisfy S = -inf <= b
        bv = E.boundary_u(G.KS_PLUS, 6, -2.0, G.SupDomain(1, 6, 0.2, 0.7))
        assert E.cdf_pvalue_trunc(bv).cdf == pytest.approx(0.5 ** 6, abs=1e-14)

    def test_epsilon_zero_h1(self):
        h1 = M.MixtureModel(0.0, M.Normal(), M.Normal(2, 1))
        for b in [1.0, 2.5, 4.0]:
            a = E.exact_cdf(E.boundary_u(G.HC2004, 40, b)).cdf
            c = E.exact_cdf(E.boundary_u(G.HC2004, 40, b, None, M.Normal(), h1)).cdf
            assert abs(a - c) <= 1e-10


class TestShape:
    @pytest.mark.parametrize("fam", FAMS, ids=lambda f: f.name)
    @pytest.mark.parametrize("dom", [None, G.SupDomain(2, 20, 0.02, 1.0), G.SupDomain(1, 40, 0.01, 0.8)],
                             ids=["index", "modified", "pvalue"])
    def test_monotone_in_b(self, fam, dom):
        n = 40
        bs = np.linspace(-0.3, 1.0, 50) if fam == G.KS_PLUS else np.linspace(-2, 8, 50)
        c = [E.exact_cdf(E.boundary_u(fam, n, b, dom)).cdf for b in bs]
        assert np.all(np.diff(c) >= -1e-12)
        assert 0.0 <= c[0] <= 1e-3 or dom is not None
        assert c[-1] >= 0.9

    def test_h1_monotone(self):
        c = [E.exact_cdf(E.boundary_u(G.BERK_JONES, 30, b, None, M.Normal(), H1)).cdf
             for b in np.linspace(-1, 6, 50)]
        assert np.all(np.diff(c) >= -1e-12)

    def test_extremes(self):
        assert E.exact_cdf(E.boundary_u(G.HC2004, 50, -50.0)).cdf == pytest.approx(0.0, abs=1e-300)
        assert E.exact_cdf(E.boundary_u(G.HC2004, 50, 1e8)).cdf == pytest.approx(1.0, abs=1e-6)


class TestPrecision:
    def test_escalates_and_matches_high_precision(self):
        bv = E.boundary_u(G.HC2004, 600, 4.0)
        r = E.exact_cdf(bv)
        ref = E.exact_cdf(bv, precision=1200)
        assert r.precision_bits > 53
        assert r.sf == pytest.approx(ref.sf, rel=1e-8)
        assert not r.loss_of_significance

    def test_small_n_stays_double(self):
        r = E.exact_cdf(E.boundary_u(G.HC2004, 20, 3.0))
        assert r.precision_bits == 53
        ref = E.exact_cdf(E.boundary_u(G.HC2004, 20, 3.0), precision=300)
        assert r.sf == pytest.approx(ref.sf, rel=1e-10)

    def test_double_flags_loss(self):
        r = E.exact_cdf(E.boundary_u(G.HC2004, 600, 4.0), precision="double")
        assert r.loss_of_significance

    def test_truncation_option_close(self):
        bv = E.boundary_u(G.HC2004, 200, 3.5)
        full = E.cdf_index_trunc(bv).sf
        tr = E.cdf_index_trunc(bv, truncate=True).sf
        assert tr == pytest.approx(full, rel=1e-6)

    def test_bad_precision(self):
        with pytest.raises(ValueError):
            E.exact_cdf(E.boundary_u(G.HC2004, 20, 3.0), precision="quad")

    def test_context_restored(self):
        before = gmpy2.get_context().precision
        E.exact_cdf(E.boundary_u(G.HC2004, 600, 4.0))
        assert gmpy2.get_context().precision == before


@pytest.mark.slow
class TestMonteCarlo:
    def test_pvalue_route(self):
        n, dom = 30, G.SupDomain(1, 30, 0.02, 0.6)
        s = sample_stats(M.Normal(), G.HC2004, dom, n, SimConfig(100_000, 5))
        for b in [0.5, 1.5, 2.5, 3.5, 5.0]:
            ex = E.exact_cdf(E.boundary_u(G.HC2004, n, b, dom), "pvalue").sf
            emp = empirical_sf(s, b).value
            assert abs(emp - ex) <= 3 * binom_se(ex, 100_000), b

    def test_mhc_general_n100(self):
        n = 100
        dom = G.SupDomain.modified_hc(n)
        s = sample_stats(M.Normal(), G.HC2004, dom, n, SimConfig(100_000, 6))
        for b in np.linspace(0.5, 6, 12):
            ex = E.cdf_general(E.boundary_u(G.HC2004, n, b, dom)).sf
            assert abs(empirical_sf(s, b).value - ex) <= 3 * binom_se(ex, 100_000), b

    def test_mhc_modified_n50(self):
        n = 50
        dom = G.SupDomain.modified_hc(n)
        s = sample_stats(M.Normal(), G.HC2004, dom, n, SimConfig(100_000, 7))
        for b in [1.0, 2.5, 4.0]:
            ex = E.cdf_modified(E.boundary_u(G.HC2004, n, b, dom)).sf
            assert abs(empirical_sf(s, b).value - ex) <= 3 * binom_se(ex, 100_000), b


@pytest.mark.slow
def test_quadratic_scaling():
    def run(n):
        bv = E.boundary_u(G.HC2004, n, 4.0)
        t = time.perf_counter()
        E.cdf_index_trunc(bv)
        return time.perf_counter() - t

    run(200)
    t1, t2 = run(1000), run(2000)
    assert t2 < 10.0
    assert t2 / t1 <= 6.0
