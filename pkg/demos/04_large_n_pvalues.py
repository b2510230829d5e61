"""Small HC p-values when n is too large for the exact recursion.

At n = 1000 the exact answer is still cheap, so the Poisson-tail formula can
be checked against it.  Beyond that only the approximation is practical.
The far tail hardly moves with n: it is driven by the smallest p-value, and
P(HC > b) is close to 1/b^2 once b is large.

    python3 demos/04_large_n_pvalues.py
"""
from sigdetect import approx as A
from sigdetect import exact as E
from sigdetect import gof as G

print("n=1000: exact vs Poisson tail")
for b in (5.0, 10.0, 20.0, 50.0):
    ex = E.exact_cdf(E.boundary_u(G.HC2004, 1000, b)).sf
    ap = A.hc_sf_approx(1000, b)
    print(f"  b={b:5.1f}  exact {ex:.4e}  approx {ap:.4e}  rel.err {abs(ap - ex) / ex:.2%}")

print("\nlarger n, Poisson tail only")
for n in (10 ** 4, 10 ** 5, 10 ** 6):
    print(f"  n={n:>8}  " + "  ".join(f"b={b:g}: {A.hc_sf_approx(n, b):.3e}" for b in (10.0, 30.0, 100.0)))
