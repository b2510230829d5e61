import math

import numpy as np
import pytest

from oracles import binom_se
from sigdetect import gof as G
from sigdetect import inference as I
from sigdetect import models as M
from sigdetect.montecarlo import SimConfig, empirical_sf, sample_stats


def mix(eps, mu):
    return M.MixtureModel(eps, M.Normal(), M.Normal(mu, 1.0))


class TestMethodChoice:
    def test_parse(self):
        assert I.MethodChoice.parse(None) == I.EXACT
        assert I.MethodChoice.parse("exact").kind == "exact-auto"
        m = I.MethodChoice.parse("mc:reps=500,seed=4")
        assert (m.kind, m.reps, m.seed) == ("mc", 500, 4)
        with pytest.raises(ValueError):
            I.MethodChoice.parse("bogus")
        with pytest.raises(ValueError):
            I.MethodChoice.parse("mc:depth=3")

    def test_auto_labels(self):
        assert I.EXACT.label(G.SupDomain(1, 50), 100) == "index"
        assert I.EXACT.label(G.SupDomain(1, 100, 0.0, 0.5), 100) == "pvalue"
        assert I.EXACT.label(G.SupDomain.modified_hc(100), 100) == "modified"
        assert I.EXACT.label(G.SupDomain(2, 50, 0.01, 0.5), 100) == "general"


class TestPvalue:
    def test_infinite(self):
        assert I.pvalue(G.HC2004, None, 30, -math.inf) == 1.0
        assert I.pvalue(G.HC2004, None, 30, math.inf) == 0.0
        with pytest.raises(ValueError):
            I.pvalue(G.HC2004, None, 30, math.nan)

    def test_table_value(self):
        assert I.pvalue(G.HC2004, G.SupDomain(1, 50), 100, 4.723) == pytest.approx(0.05, abs=5e-4)

    def test_against_simulation(self):
        n, reps = 50, 100_000
        s = sample_stats(M.Normal(), G.BERK_JONES, None, n, SimConfig(reps, 21))
        for b in [1.5, 2.0, 2.5, 3.0, 3.5]:
            ex = I.pvalue(G.BERK_JONES, None, n, b)
            assert abs(empirical_sf(s, b).value - ex) <= 3 * binom_se(ex, reps)


class TestCritical:
    @pytest.mark.parametrize("fam,n,level,table", [
        (G.BERK_JONES, 100, 0.01, 3.354),
        (G.REVERSE_BERK_JONES, 50, 0.05, 2.301),
        (G.HC2008, 100, 0.10, 2.010),
    ])
    def test_table(self, fam, n, level, table):
        assert I.critical_value(fam, None, n, level) == pytest.approx(table, abs=0.005)

    @pytest.mark.parametrize("fam,n,level", [(G.HC2004, 40, 0.05), (G.KS_PLUS, 30, 0.1),
                                             (G.PhiDiv(0.5), 60, 0.01)])
    def test_roundtrip(self, fam, n, level):
        b = I.critical_value(fam, None, n, level)
        p = I.pvalue(fam, None, n, b)
        assert level - 1e-8 <= p <= level
        # smallest such b: a step of twice the tolerance below exceeds the level
        assert I.pvalue(fam, None, n, b - 1e-9) > level - 1e-8

    def test_level_domain(self):
        with pytest.raises(ValueError):
            I.critical_value(G.HC2004, None, 20, 1.0)

    def test_mc_quantile_close(self):
        b_mc = I.critical_value(G.HC2004, None, 30, 0.1, I.MethodChoice("mc", reps=50_000, seed=2))
        b_ex = I.critical_value(G.HC2004, None, 30, 0.1)
        assert I.pvalue(G.HC2004, None, 30, b_mc) == pytest.approx(0.1, abs=3 * binom_se(0.1, 50_000))
        assert b_mc == pytest.approx(b_ex, abs=0.1)


class TestPower:
    def test_null_power_is_level(self):
        for side in ("one-sided", "two-sided"):
            p = I.power(G.HC2004, None, 50, 0.05, mix(0.0, 3.0), side)
            assert p == pytest.approx(0.05, abs=1e-6)

    def test_strong_signal(self):
        assert I.power(G.HC2004, None, 100, 0.05, mix(0.05, 20.0)) > 0.99

    def test_monotone_in_mu(self):
        vals = [I.power(G.HC2004, None, 60, 0.05, mix(0.05, mu)) for mu in np.linspace(0, 4, 9)]
        assert np.all(np.diff(vals) >= -1e-9)

    def test_monotone_in_eps(self):
        vals = [I.power(G.BERK_JONES, None, 60, 0.05, mix(e, 2.0)) for e in np.linspace(0, 0.3, 7)]
        assert np.all(np.diff(vals) >= -1e-9)

    @pytest.mark.slow
    def test_against_simulation(self):
        n, reps = 100, 100_000
        h1 = mix(0.05, 2.0)
        b = I.critical_value(G.HC2004, None, n, 0.05)
        ex = I.power(G.HC2004, None, n, 0.05, h1)
        s = sample_stats(h1, G.HC2004, None, n, SimConfig(reps, 8))
        assert abs(empirical_sf(s, b).value - ex) <= 3 * binom_se(ex, reps)

    def test_mc_method_uses_exact_threshold(self):
        h1 = mix(0.1, 2.0)
        ex = I.power(G.HC2004, None, 40, 0.05, h1)
        mc = I.power(G.HC2004, None, 40, 0.05, h1, method=I.MethodChoice("mc", reps=40_000, seed=1))
        assert abs(mc - ex) <= 3 * binom_se(ex, 40_000)


class TestDetectionBoundary:
    def test_values(self):
        assert I.detection_boundary(0.6) == pytest.approx(0.1)
        assert I.detection_boundary(0.81) == pytest.approx((1 - math.sqrt(0.19)) ** 2)

    def test_continuity_at_three_quarters(self):
        assert I.detection_boundary(0.75) == pytest.approx(0.25)
        assert (1 - math.sqrt(0.25)) ** 2 == pytest.approx(0.25)
        assert I.detection_boundary(0.75 + 1e-12) == pytest.approx(0.25, abs=1e-11)

    def test_increasing(self):
        a = np.linspace(0.501, 0.999, 300)
        assert np.all(np.diff([I.detection_boundary(x) for x in a]) > 0)

    def test_domain(self):
        for a in (0.5, 1.0, 0.2):
            with pytest.raises(ValueError):
                I.detection_boundary(a)


class TestSweep:
    def test_single_cell(self):
        rows = I.power_sweep({"family": "hc2004", "n": 50, "level": 0.05,
                              "models": [{"epsilon": 0.1, "mu": 2.0}]}, threads=1)
        assert len(rows) == 1
        assert rows[0]["power"] == I.power(G.HC2004, None, 50, 0.05, mix(0.1, 2.0))
        assert rows[0]["method"] == "index" and rows[0]["flags"] == ""

    def test_arw_cell(self):
        rows = I.power_sweep({"family": ["hc2004"], "n": 100,
                              "models": [{"alpha": 0.6, "r_factor": 1.5}]}, threads=1)
        arw = M.ArwParams(0.6, 0.15, 100)
        assert rows[0]["epsilon"] == pytest.approx(arw.epsilon)
        assert rows[0]["power"] == pytest.approx(I.power(G.HC2004, None, 100, 0.05, arw.mixture()))

    def test_errors_recorded_and_sweep_continues(self):
        rows = I.power_sweep({"family": ["hc2004", "phi:s=9"], "n": 20,
                              "models": [{"epsilon": 0.1, "mu": 1.0}, {"alpha": 0.3, "r": 0.1}]},
                             threads=1)
        assert len(rows) == 4
        assert rows[0]["flags"] == "" and 0 < rows[0]["power"] < 1
        assert all(r["flags"].startswith("error:") for r in rows[1:])
        assert all(math.isnan(r["power"]) for r in rows[1:])

    def test_deterministic_order_with_threads(self):
        grid = {"family": ["hc2004", "bj"], "n": [20, 30], "level": [0.05, 0.1],
                "models": [{"epsilon": 0.1, "mu": 1.5}, {"epsilon": 0.2, "mu": 1.0}]}
        a = I.power_sweep(grid, threads=1)
        b = I.power_sweep(grid, threads=4)
        assert a == b
        assert [(r["family"], r["n"], r["level"]) for r in a[:3]] == [
            ("hc2004", 20, 0.05), ("hc2004", 20, 0.05), ("hc2004", 20, 0.1)]
