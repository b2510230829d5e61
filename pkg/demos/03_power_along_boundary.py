"""Power of HC2004, Berk-Jones, reverse Berk-Jones and HC2008 near the detection boundary.

Signals follow the rare/weak parametrisation eps = n^-alpha,
mu = sqrt(2 r log n) with r a fixed multiple of the boundary rho*(alpha).
Sparse settings (alpha near 1) favour HC2004; denser ones favour Berk-Jones.
The second table compares HC with its modified version, which ignores
p-values below 1/n.

    python3 demos/03_power_along_boundary.py
"""
import numpy as np

from sigdetect import gof as G
from sigdetect import inference as I
from sigdetect import models as M

n, level, factor = 100, 0.05, 1.2
fams = [G.HC2004, G.BERK_JONES, G.REVERSE_BERK_JONES, G.HC2008]

print(f"power at {level:.0%}, n={n}, r = {factor} * rho*(alpha)")
print("alpha  " + "".join(f"{f.name:>9}" for f in fams))
for alpha in np.arange(0.55, 1.0, 0.05):
    h1 = M.ArwParams(alpha, factor * I.detection_boundary(alpha), n).mixture()
    print(f"{alpha:5.2f}  " + "".join(f"{I.power(f, None, n, level, h1):9.4f}" for f in fams))

print("\nHC vs modified HC (index 2..n/2, p >= 1/n), mu = 1.5")
mhc = G.SupDomain.modified_hc(n)
print("signals       HC      MHC")
for k in (1, 2, 5, 10, 20, 30):
    h1 = M.MixtureModel(k / n, M.Normal(), M.Normal(1.5, 1.0))
    print(f"{k:7d}  {I.power(G.HC2004, None, n, level, h1):7.4f}  {I.power(G.HC2004, mhc, n, level, h1):7.4f}")
