"""The double-bracket flow Y' = [[N, Y], Y] diagonalizes a symmetric matrix.

The isospectral Magnus integrator keeps the eigenvalues fixed to roundoff
while trace(Y N) climbs to its maximum and the diagonal sorts itself.
"""

import numpy as np

from magnuskit.nonlinear import integrate_nonlinear
from magnuskit.problems import double_bracket

prob = double_bracket(dim=4, seed=42, tf=20.0)
N = np.diag(np.arange(1.0, 5.0))
ev0 = np.sort(np.linalg.eigvalsh(prob.Y0.real))
path = integrate_nonlinear(prob, 0.0, 20.0, 2000, order=3, record=True)
for k in range(0, 2001, 250):
    Y = path[k].real
    drift = np.max(np.abs(np.sort(np.linalg.eigvalsh(0.5 * (Y + Y.T))) - ev0))
    off = np.linalg.norm(Y - np.diag(np.diag(Y)))
    print(f"t={k / 100:5.1f}  trace(YN)={np.trace(Y @ N):9.5f}  off-diagonal={off:.2e}  eigen drift={drift:.1e}")
print("\neigenvalues:", np.round(ev0, 6))
print("final diagonal:", np.round(np.diag(path[-1].real), 6))
