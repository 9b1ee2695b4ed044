"""Splitting integrators for separable non-autonomous systems
x' = f1(t, x) + f2(t, x).

Two families are provided: the time-extended splitting, where each sub-flow
is frozen at a clock advanced by the other sub-flow's coefficients, and the
splitting-Magnus composition, where each sub-flow uses a fixed linear blend of
time samples taken at quadrature nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import MagnusError
from .quadrature import GL2, QuadratureRule, quadrature_transform


@dataclass(frozen=True)
class SeparableFlow:
    """Exact frozen-time flows of the two sub-fields.

    ``flow1(blend, x)`` returns the time-one flow of ``sum_k w_k f1(t_k, .)``
    for ``blend = [(t_k, w_k), ...]``; ``flow2`` does the same for f2.  For a
    plain frozen flow of length ``tau`` at time ``t`` the blend is ``[(t, tau)]``.
    """

    dim: int
    flow1: Callable
    flow2: Callable
    hamiltonian: bool = False
    reference: Optional[Callable[[float, float, np.ndarray], np.ndarray]] = None
    label: str = ""
    t0: float = 0.0
    tf: float = 1.0
    x0: Optional[np.ndarray] = None


@dataclass(frozen=True)
class SplitCoefficients:
    """``layout='AB'``: 1-D ``a``/``b`` for the time-extended splitting.
    ``layout='BAB'``: two-column ``a`` (m x 2) and ``b`` ((m+1) x 2) tables for
    the splitting-Magnus composition."""

    name: str
    a: np.ndarray
    b: np.ndarray
    order: int
    layout: str
    evals_per_step: int

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if self.layout == "AB":
            if a.ndim != 1 or a.shape != b.shape:
                raise MagnusError("AB layout needs matching 1-D coefficient lists")
            sa, sb = a.sum(), b.sum()
        elif self.layout == "BAB":
            if a.ndim != 2 or b.ndim != 2 or b.shape[0] != a.shape[0] + 1:
                raise MagnusError("BAB layout needs m x k and (m+1) x k tables")
            sa, sb = a[:, 0].sum(), b[:, 0].sum()
        else:
            raise MagnusError(f"unknown layout {self.layout!r}")
        if abs(sa - 1.0) > 1e-13 or abs(sb - 1.0) > 1e-13:
            raise MagnusError(f"coefficients of {self.name} are not consistent")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)


LEAPFROG = SplitCoefficients("S2", [0.5, 0.5], [1.0, 0.0], 2, "AB", 1)


def _suzuki() -> SplitCoefficients:
    g1 = 1.0 / (4.0 - 4.0 ** (1.0 / 3.0))
    gam = [0.0, g1, g1, 1.0 - 4.0 * g1, g1, g1, 0.0]
    a = [(gam[i] + gam[i - 1]) / 2.0 for i in range(1, 7)]
    b = [gam[i] for i in range(1, 7)]
    return SplitCoefficients("SU54", a, b, 4, "AB", 5)


SUZUKI = _suzuki()

# five free parameters (b11, a11, b21, a21, b31) of each order-4 BAB method
BAB_SEEDS = {
    "GS64": (0.0792036964311957, 0.209515106613362, 0.353172906049774, -0.143851773179818, -0.0420650803577195),
    "MN64": (0.0829844064174052, 0.245298957184271, 0.396309801498368, 0.604872665711080, -0.0390563049223486),
}


def _stage_sequence(a1, b1):
    """Stages in application order as (kind, first-column coefficient, slot)."""
    seq = []
    for i in range(len(b1)):
        seq.append(("B", b1[i], ("b", i)))
        if i < len(a1):
            seq.append(("A", a1[i], ("a", i)))
    return seq


def _second_column_system(a1, b1, unknowns):
    """Linear conditions on the second columns from the grade-3 terms.

    Writing each stage as Z = c1 X1 + c2 X2 (X = A or B, X1 of grade one,
    X2 of grade two), the grade-3 part of log(prod exp Z) is
    (1/2) sum_{i>j} [Z_i, Z_j], and the exact exponent carries
    -(1/12)[A1 + B1, A2 + B2]: every bracket [X1, Y2] needs coefficient -1/12.
    ``unknowns`` maps (table, row) slots to columns of the system; each
    unknown also fixes its antisymmetric mirror row.
    """
    seq = _stage_sequence(a1, b1)
    m = {"a": len(a1), "b": len(b1)}
    rows, rhs = [], []
    for X in "AB":
        for Y in "AB":
            row = np.zeros(len(unknowns))
            for i in range(len(seq)):
                for j in range(i):
                    # [X1 from Z_i, Y2 from Z_j] and -[X1 from Z_j, Y2 from Z_i]
                    for first, second, sign in ((seq[i], seq[j], 0.5), (seq[j], seq[i], -0.5)):
                        if first[0] != X or second[0] != Y:
                            continue
                        tab, r = second[2]
                        mirror = (tab, m[tab] - 1 - r)
                        if (tab, r) in unknowns:
                            row[unknowns[(tab, r)]] += sign * first[1]
                        elif mirror in unknowns:
                            row[unknowns[mirror]] -= sign * first[1]
            rows.append(row)
            rhs.append(-1.0 / 12.0)
    return np.array(rows), np.array(rhs)


def bab_tables(b11, a11, b21, a21, b31):
    """Full (a_ij, b_ij) tables of the 6-stage BAB scheme from its seeds.

    First columns follow the palindromic relations of the autonomous method.
    Second columns are antisymmetric with a_22 = b_32 = b_42 = 0; the four
    remaining entries solve the grade-3 order conditions.
    """
    a31 = 0.5 - (a11 + a21)
    a1 = [a11, a21, a31, a31, a21, a11]
    b41 = 1.0 - 2.0 * (b11 + b21 + b31)
    b1 = [b11, b21, b31, b41, b31, b21, b11]
    unknowns = {("a", 0): 0, ("a", 2): 1, ("b", 0): 2, ("b", 1): 3}
    M, rhs = _second_column_system(a1, b1, unknowns)
    a12, a32, b12, b22 = np.linalg.solve(M, rhs)
    a2 = [a12, 0.0, a32, -a32, 0.0, -a12]
    b2 = [b12, b22, 0.0, 0.0, 0.0, -b22, -b12]
    return np.column_stack([a1, a2]), np.column_stack([b1, b2])


@lru_cache(maxsize=None)
def bab_method(name: str) -> SplitCoefficients:
    try:
        seeds = BAB_SEEDS[name]
    except KeyError:
        raise MagnusError(f"unknown BAB method {name!r}") from None
    a, b = bab_tables(*seeds)
    return SplitCoefficients(name, a, b, 4, "BAB", 6)


SPLIT_METHODS = {"S2": LEAPFROG, "SU54": SUZUKI}


def get_split_method(name: str) -> SplitCoefficients:
    if name in SPLIT_METHODS:
        return SPLIT_METHODS[name]
    return bab_method(name)


def split_step(coeffs: SplitCoefficients, flow: SeparableFlow, t: float, h: float, x):
    """Time-extended splitting: f2 with a_i at the b-clock, then f1 with b_i
    at the a-clock."""
    if coeffs.layout != "AB":
        raise MagnusError(f"{coeffs.name} is not a time-extended splitting")
    x = np.asarray(x, dtype=float)
    ta = tb = t
    for ai, bi in zip(coeffs.a, coeffs.b):
        if ai != 0.0:
            x = flow.flow2([(tb, ai * h)], x)
        ta += ai * h
        if bi != 0.0:
            x = flow.flow1([(ta, bi * h)], x)
        tb += bi * h
    return x


def blend_weights(coeffs: SplitCoefficients, rule: QuadratureRule = GL2):
    """(rho, sigma): weights of the time samples in each f1 / f2 stage."""
    s = coeffs.a.shape[1]
    tr = quadrature_transform(rule, s)
    return coeffs.a @ tr.RQ, coeffs.b @ tr.RQ


def magnus_split_step(coeffs: SplitCoefficients, flow: SeparableFlow, rule: QuadratureRule, t: float, h: float, x):
    """Splitting-Magnus BAB chain using only ``rule.k`` time samples per step."""
    if coeffs.layout != "BAB":
        raise MagnusError(f"{coeffs.name} is not a splitting-Magnus table")
    if coeffs.a.shape[1] > rule.k:
        raise MagnusError(f"rule {rule.name} has too few nodes for {coeffs.name}")
    rho, sigma = blend_weights(coeffs, rule)
    times = [t + c * h for c in rule.nodes]
    x = np.asarray(x, dtype=float)
    m = rho.shape[0]
    for i in range(m + 1):
        x = flow.flow2(list(zip(times, h * sigma[i])), x)
        if i < m:
            x = flow.flow1(list(zip(times, h * rho[i])), x)
    return x


def integrate_split(coeffs: SplitCoefficients, flow: SeparableFlow, t0: float, tf: float, n_steps: int, x0=None, rule=GL2):
    """Fixed-step run; returns (final state, force evaluations)."""
    if n_steps < 1 or not tf > t0:
        raise MagnusError("need tf > t0 and n_steps >= 1")
    x = np.asarray(flow.x0 if x0 is None else x0, dtype=float)
    grid = t0 + (tf - t0) * np.arange(n_steps + 1) / n_steps
    for n in range(n_steps):
        h = grid[n + 1] - grid[n]
        if coeffs.layout == "AB":
            x = split_step(coeffs, flow, grid[n], h, x)
        else:
            x = magnus_split_step(coeffs, flow, rule, grid[n], h, x)
    return x, coeffs.evals_per_step * n_steps


def step_jacobian(stepper, x, eps: float = 1e-6) -> np.ndarray:
    """Central finite-difference Jacobian of a one-step map."""
    x = np.asarray(x, dtype=float)
    n = x.size
    M = np.empty((n, n))
    for j in range(n):
        dx = np.zeros(n)
        dx[j] = eps * max(1.0, abs(x[j]))
        M[:, j] = (stepper(x + dx) - stepper(x - dx)) / (2 * dx[j])
    return M


def symplecticity_defect(M) -> float:
    n = M.shape[0] // 2
    J = np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])
    return float(np.linalg.norm(M.T @ J @ M - J))
