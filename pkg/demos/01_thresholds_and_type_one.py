"""Critical values of four phi-divergence statistics, checked by simulation.

For s = 2 (HC2004), 1 (Berk-Jones), 0 (reverse Berk-Jones) and -1 (HC2008)
the exact null distribution gives the threshold at 10%, 5% and 1%.  A
Monte Carlo run at each threshold should reject close to the nominal rate.

    python3 demos/01_thresholds_and_type_one.py [reps]
"""
import sys
import time

from sigdetect import gof as G
from sigdetect import inference as I
from sigdetect import models as M
from sigdetect.montecarlo import SimConfig, empirical_sf_curve, sample_stats

reps = int(sys.argv[1]) if len(sys.argv) > 1 else 20_000
levels = (0.10, 0.05, 0.01)

print(f"{'s':>3} {'n':>4}  " + "  ".join(f"{f'b@{lv:.0%}':>8} {'rate':>6}" for lv in levels))
t0 = time.perf_counter()
for s in (2, 1, 0, -1):
    fam = G.PhiDiv(float(s))
    for n in (10, 50, 100):
        dom = G.SupDomain(1, n // 2)
        bs = [I.critical_value(fam, dom, n, lv) for lv in levels]
        rates = empirical_sf_curve(sample_stats(M.Normal(), fam, dom, n, SimConfig(reps, n)), bs)
        print(f"{s:>3} {n:>4}  " + "  ".join(f"{b:8.3f} {r:6.3f}" for b, r in zip(bs, rates)))
print(f"\n{reps} simulated sets per row; total {time.perf_counter() - t0:.1f} s")
