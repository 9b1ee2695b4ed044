"""Catalog of benchmark problems with exact solutions or reference oracles."""

from __future__ import annotations

from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import MagnusError, NoOracleError
from .eigensolve import SLProblem
from .linalg import SIGMA1, SIGMA2, SIGMA3, StructureTag, expm
from .nonlinear import NonlinearProblem, double_bracket_problem
from .splitting import SeparableFlow
from .steppers import LinearProblem, integrate

CATALOG = (
    "rect-step",
    "rosen-zener",
    "example1",
    "bch-pair",
    "skew-a",
    "skew-b",
    "duffing",
    "double-bracket",
    "sl-well",
)

SKEW_H = StructureTag("skew-hermitian")


def transition_probability(U) -> float:
    """|<+|U|->|^2 for a two-level propagator."""
    return float(abs(U[0, 1]) ** 2)


# -- two-level systems -----------------------------------------------------------


def rect_step_exact_probability(gamma: float, xi: float) -> float:
    w = np.sqrt(gamma**2 + xi**2 / 4.0)
    if w == 0.0:
        return 0.0
    return float(gamma**2 / w**2 * np.sin(w) ** 2)


def rect_step_first_order(gamma: float, xi: float) -> float:
    """Transition probability from the first Magnus term alone."""
    if xi == 0.0:
        return float(np.sin(gamma) ** 2)
    return float(np.sin(2 * gamma / xi * np.sin(xi / 2)) ** 2)


def rect_step_second_order(gamma: float, xi: float) -> float:
    """Transition probability from the first two Magnus terms.

    The rotation angle of exp(Omega_1 + Omega_2) is gamma * lam / xi.
    """
    if xi == 0.0:
        return float(np.sin(gamma) ** 2)
    lam = np.sqrt(4 * np.sin(xi / 2) ** 2 + gamma**2 / xi**2 * (np.sin(xi) - xi) ** 2)
    return float(4 * np.sin(xi / 2) ** 2 * np.sin(gamma * lam / xi) ** 2 / lam**2)


def rect_step(gamma: float = 1.0, xi: float = 1.0) -> LinearProblem:
    """Constant coupling switched on over s in [0, 1], interaction picture."""

    def A(s):
        return -1j * gamma * (SIGMA1 * np.cos(xi * s) - SIGMA2 * np.sin(xi * s))

    def exact(s):
        return expm(0.5j * xi * s * SIGMA3) @ expm(-1j * (0.5 * xi * SIGMA3 + gamma * SIGMA1) * s)

    return LinearProblem(
        2, A, SKEW_H, exact, f"rect-step(gamma={gamma:g},xi={xi:g})", 0.0, 1.0,
        transition_probability, rect_step_exact_probability(gamma, xi),
    )


def rosen_zener_exact_probability(gamma: float, xi: float) -> float:
    return float(np.sin(gamma) ** 2 / np.cosh(np.pi * xi / 2) ** 2)


def rosen_zener_first_order(gamma: float, xi: float) -> float:
    return float(np.sin(gamma / np.cosh(np.pi * xi / 2)) ** 2)


def rosen_zener(gamma: float = 1.0, xi: float = 0.3, window: float = 25.0) -> LinearProblem:
    """Sech-shaped pulse in scaled time s over [-window, window]."""
    if window < 10:
        raise MagnusError("Rosen-Zener window must be at least 10")
    if gamma < 0:
        raise MagnusError("gamma must be non-negative")

    def A(s):
        return -1j * gamma / np.pi / np.cosh(s) * (SIGMA1 * np.cos(xi * s) - SIGMA2 * np.sin(xi * s))

    return LinearProblem(
        2, A, SKEW_H, None, f"rosen-zener(gamma={gamma:g},xi={xi:g})", -window, window,
        transition_probability, rosen_zener_exact_probability(gamma, xi),
    )


# -- Example 1 and the piecewise-constant pair -------------------------------------


def example1() -> LinearProblem:
    def A(t):
        return np.array([[2.0, t], [0.0, -1.0]], dtype=complex)

    def exact(t):
        return np.array(
            [[np.exp(2 * t), np.exp(2 * t) / 9 - (1 / 9 + t / 3) * np.exp(-t)], [0.0, np.exp(-t)]],
            dtype=complex,
        )

    return LinearProblem(2, A, StructureTag(), exact, "example1", 0.0, 1.0)


def example1_omega_exact(n: int, t: float) -> np.ndarray:
    """Closed form of the n-th Magnus term of Example 1 on [0, t]."""
    from .expansion import BERNOULLI
    from math import factorial

    if n == 1:
        return np.array([[2 * t, t * t / 2], [0, -t]], dtype=complex)
    val = -(t / 3) * BERNOULLI[n] * (3 * t) ** n / factorial(n)
    return np.array([[0, val], [0, 0]], dtype=complex)


def bch_pair(X1=None, X2=None, alpha: Optional[float] = None, beta: Optional[float] = None, seed: int = 42, dim: int = 3, scale: float = 0.2) -> LinearProblem:
    """A = X2 on [0, 1] and X1 on (1, 2], so Y(2) = exp(X1) exp(X2).

    With ``alpha``/``beta`` the pair is ``X1 = alpha sigma_3``,
    ``X2 = beta E_12`` (the two-level example with closed-form terms).
    Otherwise random matrices of Frobenius norm ``scale`` are drawn.
    """
    if alpha is not None or beta is not None:
        X1 = (alpha or 0.0) * SIGMA3
        X2 = (beta or 0.0) * np.array([[0, 1], [0, 0]], dtype=complex)
    elif X1 is None or X2 is None:
        rng = np.random.default_rng(seed)
        mats = []
        for _ in range(2):
            M = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
            mats.append(scale * M / np.linalg.norm(M))
        X1, X2 = mats
    X1 = np.asarray(X1, dtype=complex)
    X2 = np.asarray(X2, dtype=complex)
    E2 = expm(X2)

    def A(t):
        return X2 if t <= 1.0 else X1

    def exact(t):
        if t <= 1.0:
            return expm(t * X2)
        return expm((t - 1.0) * X1) @ E2

    return LinearProblem(
        X1.shape[0], A, StructureTag(), exact, "bch-pair", 0.0, 2.0,
        breakpoints=(1.0,), data={"X1": X1, "X2": X2},
    )


# -- skew-symmetric pair -------------------------------------------------------


def _skew(fun, N):
    iu, ju = np.triu_indices(N, 1)
    i, j = iu + 1.0, ju + 1.0

    def A(t):
        M = np.zeros((N, N), dtype=complex)
        M[iu, ju] = fun(t, i, j)
        return M - M.T

    return A


def skew_problem(kind: str, N: int = 10, tf: float = 10.0, ref_h: float = 1.0 / 320.0) -> LinearProblem:
    """Skew-symmetric N x N test matrices; oracle is a fine-step M6 run."""
    if kind == "a":
        A = _skew(lambda t, i, j: np.sin(t * (j * j - i * i)), N)
    elif kind == "b":
        A = _skew(lambda t, i, j: np.log1p(t * (j - i) / (j + i)), N)
    else:
        raise MagnusError("skew kind must be 'a' or 'b'")

    prob = LinearProblem(N, A, StructureTag("skew-symmetric"), None, f"skew-{kind}", 0.0, tf)
    cache = {prob.t0: np.eye(N, dtype=complex)}

    def reference(t):
        # continue from the latest cached time not beyond t
        t = float(t)
        if t in cache:
            return cache[t]
        start = max(k for k in cache if k <= t)
        n = max(1, int(round((t - start) / ref_h)))
        Y = integrate("M6GL", prob, start, t, n, Y0=cache[start]).Y
        cache[t] = Y
        return Y

    prob.reference = reference
    return prob


# -- Duffing -----------------------------------------------------------------------


def duffing(eps: float = 0.05, delta: float = 0.25, omega: float = 1.0, q0: float = 1.75, p0: float = 0.0, tf: float = 10 * np.pi) -> SeparableFlow:
    """Damped-forced Duffing oscillator in canonical variables.

    f1 is the drift q' = exp(-eps t) p, f2 the kick p' = exp(eps t)(q - q^3 + delta cos(omega t)).
    """

    def drift(blend, x):
        q, p = x
        w = sum(tau * np.exp(-eps * t) for t, tau in blend)
        return np.array([q + w * p, p])

    def kick(blend, x):
        q, p = x
        wf = sum(tau * np.exp(eps * t) for t, tau in blend)
        wc = sum(tau * np.exp(eps * t) * delta * np.cos(omega * t) for t, tau in blend)
        return np.array([q, p + wf * (q - q**3) + wc])

    def rhs(t, x):
        q, p = x
        return [np.exp(-eps * t) * p, np.exp(eps * t) * (q - q**3 + delta * np.cos(omega * t))]

    @lru_cache(maxsize=None)
    def _ref(t0, t1, q, p):
        sol = solve_ivp(rhs, (t0, t1), [q, p], method="DOP853", rtol=1e-13, atol=1e-13)
        return tuple(sol.y[:, -1])

    def reference(t0, t1, x):
        return np.array(_ref(float(t0), float(t1), float(x[0]), float(x[1])))

    return SeparableFlow(2, drift, kick, True, reference, "duffing", 0.0, tf, np.array([q0, p0]))


# -- double bracket and eigen well ---------------------------------------------------


def double_bracket(dim: int = 3, seed: int = 42, tf: float = 1.0) -> NonlinearProblem:
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((dim, dim))
    Y0 = (M + M.T) / 2
    N = np.diag(np.arange(1.0, dim + 1))
    return double_bracket_problem(N, Y0, 0.0, tf)


POTENTIALS = {
    "zero": lambda x: 0.0,
    "square": lambda x: x * x,
    "mathieu": lambda x: 10.0 * np.cos(2 * x),
}


def sl_well(potential: str = "zero", a: float = 0.0, b: float = np.pi, N: int = 200, order: int = 4) -> SLProblem:
    try:
        V = POTENTIALS[potential]
    except KeyError:
        raise MagnusError(f"unknown potential {potential!r}; known: {', '.join(POTENTIALS)}") from None
    return SLProblem(V, a, b, N, order, f"sl-well({potential})")


_BUILDERS = {
    "rect-step": rect_step,
    "rosen-zener": rosen_zener,
    "example1": example1,
    "bch-pair": bch_pair,
    "skew-a": lambda **kw: skew_problem("a", **kw),
    "skew-b": lambda **kw: skew_problem("b", **kw),
    "duffing": duffing,
    "double-bracket": double_bracket,
    "sl-well": sl_well,
}


def make_problem(name: str, **params):
    try:
        build = _BUILDERS[name]
    except KeyError:
        raise MagnusError(f"unknown problem {name!r}; catalog: {', '.join(CATALOG)}") from None
    return build(**params)


def exact_observable(problem, t: Optional[float] = None):
    """Exact propagator at ``t`` or, with ``t=None``, the exact scalar
    observable at the end of the window when one is defined."""
    if isinstance(problem, LinearProblem):
        if t is None and problem.exact_observable is not None:
            return problem.exact_observable
        return problem.solution(problem.tf if t is None else t)
    if isinstance(problem, SeparableFlow) and problem.reference is not None:
        t1 = problem.tf if t is None else t
        return problem.reference(problem.t0, t1, problem.x0)
    raise NoOracleError(f"no oracle for {getattr(problem, 'label', problem)!r}")
