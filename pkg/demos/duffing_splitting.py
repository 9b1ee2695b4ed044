"""Damped and forced Duffing oscillator with symplectic splittings.

Compares leapfrog, Suzuki's fourth-order composition and the two
splitting-Magnus schemes at equal numbers of force evaluations.
"""

import numpy as np

from magnuskit.problems import duffing
from magnuskit.splitting import get_split_method, integrate_split

flow = duffing()
ref = flow.reference(flow.t0, flow.tf, flow.x0)
print(f"reference state at t = 10 pi: q = {ref[0]:.10f}, p = {ref[1]:.10f}\n")
print(f"{'evals':>6s}" + "".join(f"{m:>11s}" for m in ("S2", "SU54", "GS64", "MN64")))
for evals in (600, 1200, 2400, 4800):
    row = f"{evals:6d}"
    for name in ("S2", "SU54", "GS64", "MN64"):
        c = get_split_method(name)
        x, _ = integrate_split(c, flow, flow.t0, flow.tf, evals // c.evals_per_step)
        row += f"{np.linalg.norm(x - ref):11.2e}"
    print(row)
