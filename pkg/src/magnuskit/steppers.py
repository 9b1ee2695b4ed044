"""Fixed-step integrators for linear problems Y' = A(t) Y.

Every step function has the signature ``step(spec, prob, t, h, Y, sample)``
where ``sample`` evaluates the coefficient map; ``integrate`` passes a caching
sampler so endpoint samples are shared between consecutive steps.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import tableaux
from .errors import MagnusError, NoOracleError, OrderIndeterminate, StructureError
from .expansion import collocation_alphas, omega_truncated
from .linalg import (
    StructureTag,
    as_matrix,
    closed_form_exp,
    commutator,
    expm,
    frobenius_norm,
    pade_lie_map,
    solve_linear,
)
from .quadrature import GL1, GL2, GL3, NC3, NC5

_S3 = np.sqrt(3.0)


@dataclass
class LinearProblem:
    """Coefficient map plus structure tag and optional exact solution.

    ``t0``/``tf`` give the default integration window; ``observable`` maps a
    propagator to a scalar (e.g. a transition probability) and
    ``exact_observable`` is its exact value at ``tf``.  ``breakpoints`` lists
    discontinuities of ``A``; ``data`` carries problem parameters.
    """

    dim: int
    A: Callable[[float], np.ndarray]
    structure: StructureTag = field(default_factory=StructureTag)
    exact: Optional[Callable[[float], np.ndarray]] = None
    label: str = ""
    t0: float = 0.0
    tf: float = 1.0
    observable: Optional[Callable[[np.ndarray], float]] = None
    exact_observable: Optional[float] = None
    reference: Optional[Callable[[float], np.ndarray]] = None
    breakpoints: tuple = ()
    data: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 1:
            raise MagnusError("dim must be positive")
        for t in (self.t0, 0.5 * (self.t0 + self.tf)):
            M = as_matrix(self.A(t), self.dim)
            scale = max(frobenius_norm(M), 1.0)
            if self.structure.algebra_defect(M) > 1e-12 * scale:
                raise StructureError(f"A({t}) violates the {self.structure.kind} tag")

    def solution(self, t: float) -> np.ndarray:
        """Exact (or stored reference) propagator from t0 to t."""
        if self.exact is not None:
            return np.asarray(self.exact(t), dtype=complex)
        if self.reference is not None:
            return np.asarray(self.reference(t), dtype=complex)
        raise NoOracleError(f"problem {self.label!r} has no exact solution")


FAMILIES = ("magnus", "cf", "fer", "cayley", "rk-explicit", "rk-implicit")
ENGINES = ("pade-exact", "pade-lie", "closed-form")


@dataclass(frozen=True)
class MethodSpec:
    family: str
    order: int
    quad: str = "gl"
    engine: str = "pade-exact"
    pade_m: Optional[int] = None
    variant: int = 1
    tableau: Optional[str] = None
    label: str = ""

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise MagnusError(f"unknown method family {self.family!r}")
        if self.quad not in ("gl", "nc"):
            raise MagnusError(f"unknown quadrature flavor {self.quad!r}")
        if self.engine not in ENGINES:
            raise MagnusError(f"unknown exponential engine {self.engine!r}")
        if self.engine == "pade-lie" and (self.pade_m is None or self.pade_m < 1):
            raise MagnusError("pade-lie engine needs pade_m >= 1")
        allowed = {
            "magnus": (2, 4, 6),
            "cf": (4,),
            "fer": (4, 6),
            "cayley": (4, 6),
            "rk-explicit": (1, 4, 6),
            "rk-implicit": (4, 6),
        }[self.family]
        if self.order not in allowed:
            raise MagnusError(f"{self.family} does not support order {self.order}")
        if self.family.startswith("rk") and self.tableau not in tableaux.TABLEAUX:
            raise MagnusError("Runge-Kutta methods need a known tableau")

    @property
    def name(self) -> str:
        return self.label or f"{self.family}{self.order}"

    @property
    def symmetric(self) -> bool:
        return self.family in ("magnus", "cf", "fer", "cayley", "rk-implicit")


METHODS = {
    "E1": MethodSpec("rk-explicit", 1, tableau="E1", label="E1"),
    "M2": MethodSpec("magnus", 2, label="M2"),
    "M4GL": MethodSpec("magnus", 4, "gl", label="M4GL"),
    "M4NC": MethodSpec("magnus", 4, "nc", label="M4NC"),
    "M4NC2": MethodSpec("magnus", 4, "nc", variant=2, label="M4NC2"),
    "M6GL": MethodSpec("magnus", 6, "gl", label="M6GL"),
    "M6NC": MethodSpec("magnus", 6, "nc", label="M6NC"),
    "CF4": MethodSpec("cf", 4, label="CF4"),
    "CF4-3": MethodSpec("cf", 4, variant=3, label="CF4-3"),
    "SF4": MethodSpec("fer", 4, label="SF4"),
    "SF6": MethodSpec("fer", 6, label="SF6"),
    "CAY4": MethodSpec("cayley", 4, label="CAY4"),
    "CAY6": MethodSpec("cayley", 6, label="CAY6"),
    "MP4": MethodSpec("magnus", 4, engine="pade-lie", pade_m=2, label="MP4"),
    "MP6": MethodSpec("magnus", 6, engine="pade-lie", pade_m=3, label="MP6"),
    "MP68": MethodSpec("magnus", 6, engine="pade-lie", pade_m=4, label="MP68"),
    "RK4": MethodSpec("rk-explicit", 4, tableau="RK4", label="RK4"),
    "RK6": MethodSpec("rk-explicit", 6, tableau="RK6", label="RK6"),
    "GL-RK4": MethodSpec("rk-implicit", 4, tableau="GL-RK4", label="GL-RK4"),
    "GL-RK6": MethodSpec("rk-implicit", 6, tableau="GL-RK6", label="GL-RK6"),
}
METHODS["M6"] = METHODS["M6GL"]
METHODS["M4"] = METHODS["M4GL"]


def get_method(name: str) -> MethodSpec:
    try:
        return METHODS[name]
    except KeyError:
        raise MagnusError(f"unknown method {name!r}; known: {', '.join(sorted(METHODS))}") from None


# -- exponential engines ----------------------------------------------------


def apply_exp(spec: MethodSpec, Omega: np.ndarray) -> np.ndarray:
    if spec.engine == "pade-exact":
        return expm(Omega)
    if spec.engine == "pade-lie":
        return pade_lie_map(Omega, spec.pade_m)
    if Omega.shape != (2, 2):
        raise StructureError("closed-form engine needs 2x2 matrices")
    if np.max(np.abs(Omega.imag)) == 0.0:
        return closed_form_exp("sl2", Omega)
    return closed_form_exp("su2", Omega)


# -- samples ------------------------------------------------------------------


def _rule_for(spec: MethodSpec):
    if spec.order == 2:
        return GL1, 1
    if spec.order == 4:
        return (GL2 if spec.quad == "gl" else NC3), 2
    return (GL3 if spec.quad == "gl" else NC5), 3


def _samples(sample, rule, t, h):
    return [sample(t + c * h) for c in rule.nodes]


def magnus_omega(spec: MethodSpec, t: float, h: float, sample) -> np.ndarray:
    """Truncated Magnus exponent over [t, t+h]."""
    if spec.order == 2:
        return h * sample(t + 0.5 * h)
    rule, s = _rule_for(spec)
    A = _samples(sample, rule, t, h)
    if spec.order == 4 and spec.quad == "nc" and spec.variant == 2:
        return h / 6.0 * (A[0] + 4.0 * A[1] + A[2]) - h * h / 12.0 * commutator(A[0], A[2])
    return omega_truncated(collocation_alphas(A, rule, s, h), spec.order)


def magnus_step(spec: MethodSpec, prob: LinearProblem, t: float, h: float, Y, sample=None):
    sample = sample or prob.A
    return apply_exp(spec, magnus_omega(spec, t, h, sample)) @ Y


RHO_DIAG = (3.0 + 2.0 * _S3) / 12.0
RHO_OFF = (3.0 - 2.0 * _S3) / 12.0


def cf4_step(spec: MethodSpec, prob: LinearProblem, t: float, h: float, Y, sample=None):
    """Commutator-free product of two exponentials from GL2 samples.

    ``variant=3`` selects the three-exponential form
    exp(a2/12) exp(a1) exp(-a2/12).
    """
    sample = sample or prob.A
    A1, A2 = _samples(sample, GL2, t, h)
    if spec.variant == 3:
        al = collocation_alphas([A1, A2], GL2, 2, h).alphas
        E = apply_exp(spec, al[1] / 12.0)
        Einv = apply_exp(spec, -al[1] / 12.0)
        return E @ (apply_exp(spec, al[0]) @ (Einv @ Y))
    first = apply_exp(spec, h * (RHO_DIAG * A1 + RHO_OFF * A2))
    second = apply_exp(spec, h * (RHO_OFF * A1 + RHO_DIAG * A2))
    return second @ (first @ Y)


def fer_exponents(order: int, t: float, h: float, sample):
    """(S1, S2) of the symmetric Fer factorization exp(S1) exp(S2) exp(S1)."""
    if order == 4:
        al = collocation_alphas(_samples(sample, GL2, t, h), GL2, 2, h)
        a1, a2 = al.alphas
        return 0.5 * al.moments[0], -commutator(a1, a2) / 12.0
    if order == 6:
        al = collocation_alphas(_samples(sample, GL3, t, h), GL3, 3, h)
        a1, a2, a3 = al.alphas
        s1 = commutator(a1, a2)
        r1 = commutator(a1, -4.0 * a3 + 3.0 * s1) / 120.0
        S2 = commutator(-20.0 * a1 - a3 + s1, a2 + r1) / 240.0
        # the quadrature value of the first Magnus term is a1 + a3/12
        return 0.5 * al.moments[0], S2
    raise MagnusError(f"symmetric Fer of order {order} not available")


def fer_step(spec: MethodSpec, prob: LinearProblem, t: float, h: float, Y, sample=None):
    sample = sample or prob.A
    S1, S2 = fer_exponents(spec.order, t, h, sample)
    E1 = apply_exp(spec, S1)
    return E1 @ (apply_exp(spec, S2) @ (E1 @ Y))


def cayley_generator(Omega: np.ndarray, order: int) -> np.ndarray:
    """C with cay(C) = exp(Omega) + O(h^(order+1))."""
    I = np.eye(Omega.shape[0], dtype=complex)
    O2 = Omega @ Omega
    if order == 4:
        return Omega @ (I - O2 / 12.0)
    if order == 6:
        return Omega @ (I - O2 / 12.0 @ (I - O2 / 10.0))
    raise MagnusError(f"Cayley method of order {order} not available")


_CAYLEY_BLOCKED = ("traceless",)


def cayley_step(spec: MethodSpec, prob: LinearProblem, t: float, h: float, Y, sample=None):
    """Cayley-transform step built from the Magnus exponent.

    Exact group preservation holds for quadratic groups; on untagged problems
    the map is still an order-``p`` approximation of the flow.
    """
    if prob.structure.kind in _CAYLEY_BLOCKED:
        raise StructureError(f"Cayley methods do not preserve the {prob.structure.kind} group")
    sample = sample or prob.A
    mspec = MethodSpec("magnus", spec.order, "gl")
    C = cayley_generator(magnus_omega(mspec, t, h, sample), spec.order)
    I = np.eye(C.shape[0], dtype=complex)
    return solve_linear(I - 0.5 * C, (I + 0.5 * C) @ Y)


def rk_step(tab, prob: LinearProblem, t: float, h: float, Y, sample=None):
    """One Runge-Kutta step for the linear system; implicit tableaux use a
    single block solve."""
    if isinstance(tab, str):
        tab = tableaux.TABLEAUX[tab]
    sample = sample or prob.A
    s = tab.stages
    A = [sample(t + c * h) for c in tab.c]
    if tab.explicit:
        K = []
        for i in range(s):
            Yi = Y.copy()
            for j in range(i):
                if tab.a[i, j] != 0.0:
                    Yi = Yi + h * tab.a[i, j] * K[j]
            K.append(A[i] @ Yi)
        out = Y.copy()
        for i in range(s):
            if tab.b[i] != 0.0:
                out = out + h * tab.b[i] * K[i]
        return out
    d = Y.shape[0]
    M = np.eye(s * d, dtype=complex)
    for i in range(s):
        for j in range(s):
            M[i * d : (i + 1) * d, j * d : (j + 1) * d] -= h * tab.a[i, j] * A[j]
    rhs = np.vstack([Y] * s)
    stages = solve_linear(M, rhs)
    out = Y.copy()
    for i in range(s):
        out = out + h * tab.b[i] * (A[i] @ stages[i * d : (i + 1) * d])
    return out


def step(spec: MethodSpec, prob: LinearProblem, t: float, h: float, Y, sample=None):
    """Dispatch one step of ``spec``."""
    Y = np.asarray(Y, dtype=complex)
    if spec.family == "magnus":
        return magnus_step(spec, prob, t, h, Y, sample)
    if spec.family == "cf":
        return cf4_step(spec, prob, t, h, Y, sample)
    if spec.family == "fer":
        return fer_step(spec, prob, t, h, Y, sample)
    if spec.family == "cayley":
        return cayley_step(spec, prob, t, h, Y, sample)
    return rk_step(spec.tableau, prob, t, h, Y, sample)


def step_costs(spec: MethodSpec) -> tuple:
    """(exponentials, commutators) per step."""
    if spec.family == "magnus":
        comm = {2: 0, 4: 1, 6: 3}[spec.order]
        return 1, comm
    if spec.family == "cf":
        return (3, 0) if spec.variant == 3 else (2, 0)
    if spec.family == "fer":
        return (3, 1) if spec.order == 4 else (3, 3)
    if spec.family == "cayley":
        return 0, {4: 1, 6: 3}[spec.order]
    return 0, 0


# -- driver -------------------------------------------------------------------


class _Sampler:
    """Counts distinct coefficient evaluations and reuses samples from the
    previous step (the shared endpoint of Newton-Cotes and RK rules)."""

    def __init__(self, A):
        self.A = A
        self.count = 0
        self.cur: dict = {}
        self.prev: dict = {}

    def next_step(self, t_start: float, t_end: float):
        self.prev, self.cur = self.cur, {}
        self.ends = (t_start, t_end)

    def __call__(self, t: float) -> np.ndarray:
        key = float(t)
        for e in getattr(self, "ends", ()):
            # t + 1.0*h may differ from the next grid point in the last bit
            if abs(key - e) <= 4 * np.finfo(float).eps * max(1.0, abs(e)):
                key = e
        for cache in (self.cur, self.prev):
            if key in cache:
                self.cur[key] = cache[key]
                return cache[key]
        val = np.asarray(self.A(key), dtype=complex)
        self.count += 1
        self.cur[key] = val
        return val


def _grid(t0: float, tf: float, n: int) -> np.ndarray:
    # exact shared endpoints, independent of accumulated roundoff
    return t0 + (tf - t0) * np.arange(n + 1) / n


@dataclass
class RunStats:
    steps: int
    a_evaluations: int
    exponentials: int
    commutators: int
    Y: np.ndarray
    wall_ns: int
    h: float
    checkpoints: dict = field(default_factory=dict)


def integrate(
    spec: MethodSpec,
    prob: LinearProblem,
    t0: float,
    tf: float,
    n_steps: int,
    Y0=None,
    checkpoints: Sequence[int] = (),
) -> RunStats:
    """Fixed-step integration from ``Y(t0) = Y0`` (identity by default).

    ``checkpoints`` lists step counts at which a copy of the state is kept.
    """
    if not tf > t0:
        raise MagnusError("integrate needs tf > t0")
    if n_steps < 1:
        raise MagnusError("n_steps must be at least 1")
    if isinstance(spec, str):
        spec = get_method(spec)
    Y = np.eye(prob.dim, dtype=complex) if Y0 is None else as_matrix(Y0).copy()
    grid = _grid(t0, tf, n_steps)
    h = (tf - t0) / n_steps
    sampler = _Sampler(prob.A)
    want = set(checkpoints)
    saved = {}
    start = time.perf_counter_ns()
    for n in range(n_steps):
        sampler.next_step(grid[n], grid[n + 1])
        hn = grid[n + 1] - grid[n]
        Y = step(spec, prob, grid[n], hn, Y, sampler)
        if n + 1 in want:
            saved[n + 1] = Y.copy()
    wall = time.perf_counter_ns() - start
    ne, nc = step_costs(spec)
    return RunStats(n_steps, sampler.count, ne * n_steps, nc * n_steps, Y, wall, h, saved)


def run_error(spec, prob: LinearProblem, t0: float, tf: float, n_steps: int) -> float:
    stats = integrate(spec, prob, t0, tf, n_steps)
    return frobenius_norm(stats.Y - prob.solution(tf))


def empirical_order(spec, prob: LinearProblem, t0: float, tf: float, steps_list: Sequence[int]) -> float:
    """Least-squares slope of log(error) against log(h)."""
    steps_list = list(steps_list)
    if len(steps_list) < 3:
        raise MagnusError("empirical_order needs at least three step counts")
    ratios = np.array(steps_list[1:], dtype=float) / np.array(steps_list[:-1], dtype=float)
    if not np.allclose(ratios, ratios[0], rtol=1e-9):
        raise MagnusError("step counts must form a geometric sequence")
    errs = np.array([run_error(spec, prob, t0, tf, n) for n in steps_list])
    if np.any(errs == 0.0):
        raise OrderIndeterminate("order-indeterminate")
    hs = (tf - t0) / np.array(steps_list, dtype=float)
    return float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
