"""Dirichlet spectrum of -phi'' + 10 cos(2x) phi = lambda phi on (0, pi).

Eigenvalues come from Magnus shooting; scipy's Mathieu characteristic values
b_n(q = 5) serve as an independent check.
"""

from scipy.special import mathieu_b

from magnuskit.eigensolve import scan_eigenvalues
from magnuskit.problems import sl_well

for order in (4, 6):
    prob = sl_well("mathieu", N=200, order=order)
    lams = scan_eigenvalues(prob, -10.0, 80.0, 0.25)
    print(f"order {order}")
    for n, lam in enumerate(lams, 1):
        print(f"  n={n:2d}  lambda={lam:16.10f}  error={abs(lam - mathieu_b(n, 5.0)):.2e}")
