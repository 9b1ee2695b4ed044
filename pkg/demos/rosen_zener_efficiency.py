"""Error versus work on the Rosen-Zener pulse.

Prints the transition-probability error of Magnus, commutator-free and
Runge-Kutta integrators against the number of coefficient evaluations.
Exponential methods keep the propagator unitary, so their error is purely
phase error; the Runge-Kutta rows also leak probability.
"""

from magnuskit.problems import rosen_zener
from magnuskit.steppers import integrate

prob = rosen_zener(gamma=10.0, xi=0.3)
print(f"exact transition probability: {prob.exact_observable:.12f}\n")
print(f"{'method':8s} {'evals':>6s} {'|P - P_ex|':>12s} {'unitarity':>11s}")
for method in ("M2", "M4GL", "CF4", "M6GL", "RK4", "RK6"):
    for n in (150, 300, 600, 1200):
        st = integrate(method, prob, prob.t0, prob.tf, n)
        err = abs(prob.observable(st.Y) - prob.exact_observable)
        print(f"{method:8s} {st.a_evaluations:6d} {err:12.3e} {prob.structure.group_defect(st.Y):11.2e}")
    print()
