"""Where the Magnus series stops converging for a triangular 2x2 system.

A(t) = [[2, t], [0, -1]] has a single-step Magnus series with radius 2 pi / 3.
The norm ratio of the sixth to the fourth term crosses one there, while the
integral of ||A||, the classical sufficient bound, reaches pi much later.
"""

import numpy as np

from magnuskit.expansion import convergence_margin, magnus_terms
from magnuskit.linalg import frobenius_norm
from magnuskit.problems import example1

prob = example1()
print(f"{'t':>6s} {'|O6|/|O4|':>10s} {'int ||A||':>10s}")
for t in np.arange(1.0, 3.01, 0.25):
    mt = magnus_terms(prob.A, 0.0, t, 6, 512)
    ratio = frobenius_norm(mt.terms[5]) / frobenius_norm(mt.terms[3])
    print(f"{t:6.2f} {ratio:10.4f} {convergence_margin(prob.A, 0.0, t):10.4f}")
print(f"\nseries radius 2 pi / 3 = {2 * np.pi / 3:.4f}")
