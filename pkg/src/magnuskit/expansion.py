"""Magnus expansion machinery.

Graded-algebra reconstruction from quadrature samples, truncated exponents of
order 4 and 6, the recursive generator for the individual terms Omega_n, the
BCH and Wilcox term relations and the convergence monitor.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .errors import MagnusError, OrderNotSupported
from .linalg import commutator, spectral_norm
from .quadrature import QuadratureRule, quadrature_transform


def _bernoulli(nmax: int) -> tuple:
    """Exact Bernoulli numbers with B_1 = -1/2."""
    B = [Fraction(1)]
    for m in range(1, nmax + 1):
        acc = sum(Fraction(factorial(m + 1), factorial(k) * factorial(m + 1 - k)) * B[k] for k in range(m))
        B.append(-acc / (m + 1))
    return tuple(B)


BERNOULLI_EXACT = _bernoulli(12)
BERNOULLI = tuple(float(b) for b in BERNOULLI_EXACT)


@dataclass(frozen=True)
class GradedAlphas:
    """Scaled midpoint Taylor coefficients; ``alphas[i-1]`` has grade i."""

    h: float
    alphas: tuple
    moments: Optional[tuple] = None

    @property
    def s(self) -> int:
        return len(self.alphas)


@dataclass(frozen=True)
class MagnusTerms:
    terms: tuple
    interval: tuple

    def partial_sum(self, n: Optional[int] = None) -> np.ndarray:
        return sum(self.terms[: n or len(self.terms)])


def collocation_alphas(samples: Sequence, rule: QuadratureRule, s: int, h: float) -> GradedAlphas:
    """Reconstruct alpha_1..alpha_s from samples ``A(t + c_j h)`` of ``rule``."""
    if len(samples) != rule.k:
        raise MagnusError(f"rule {rule.name} needs {rule.k} samples, got {len(samples)}")
    tr = quadrature_transform(rule, s)
    S = np.asarray(samples, dtype=complex)
    if S.ndim != 3 or S.shape[1] != S.shape[2]:
        raise MagnusError("samples must be square matrices of a common size")
    alphas = h * np.tensordot(tr.RQ, S, axes=1)
    moments = h * np.tensordot(tr.Q, S, axes=1)
    return GradedAlphas(h, tuple(alphas), tuple(moments))


def omega_truncated(alphas: GradedAlphas, order: int) -> np.ndarray:
    """Truncated Magnus exponent of order 4 (one commutator) or 6 (three)."""
    a = alphas.alphas
    if order == 4:
        if len(a) < 2:
            raise MagnusError("order 4 needs two graded alphas")
        return a[0] - commutator(a[0], a[1]) / 12.0
    if order == 6:
        if len(a) < 3:
            raise MagnusError("order 6 needs three graded alphas")
        a1, a2, a3 = a[:3]
        c1 = commutator(a1, a2)
        c2 = -commutator(a1, 2.0 * a3 + c1) / 60.0
        return a1 + a3 / 12.0 + commutator(-20.0 * a1 - a3 + c1, a2 + c2) / 240.0
    raise OrderNotSupported(f"truncated exponent of order {order} not available")


def _segments(t0: float, t: float, breakpoints) -> list:
    pts = [t0]
    lo, hi = min(t0, t), max(t0, t)
    for b in sorted(breakpoints or (), reverse=t < t0):
        if lo < b < hi:
            pts.append(b)
    pts.append(t)
    return list(zip(pts[:-1], pts[1:]))


def _cumulative_simpson(vals, dx):
    # scipy's routine drops imaginary parts
    re_ = cumulative_simpson(vals.real, dx=dx, axis=0, initial=0)
    im_ = cumulative_simpson(vals.imag, dx=dx, axis=0, initial=0)
    return re_ + 1j * im_


def _comm(X, Y):
    return X @ Y - Y @ X


def magnus_terms(
    A: Callable[[float], np.ndarray],
    t0: float,
    t: float,
    n_max: int = 4,
    grid: int = 256,
    breakpoints: Optional[Sequence[float]] = None,
) -> MagnusTerms:
    """Omega_1..Omega_{n_max} over [t0, t] from the nested-commutator recurrence.

    Every term is tabulated on a uniform grid and integrated with cumulative
    composite Simpson, so each carries an O(grid^-4) quadrature error.
    ``breakpoints`` marks discontinuities of ``A``; each piece gets its own
    grid and is sampled from its interior side.
    """
    if n_max > 6:
        raise OrderNotSupported("order-not-supported")
    if n_max < 1:
        raise MagnusError("n_max must be at least 1")
    if grid < 8 or grid % 2:
        raise MagnusError("grid must be even and at least 8")

    segs = _segments(t0, t, breakpoints)
    samples = []
    steps = []
    for a, b in segs:
        x = np.linspace(a, b, grid + 1)
        if breakpoints:
            nudge = 1e-13 * (b - a)
            x[0] += nudge
            x[-1] -= nudge
        samples.append(np.array([A(float(xi)) for xi in x], dtype=complex))
        steps.append((b - a) / grid)

    def integrate(f):
        out = []
        offset = 0.0
        for vals, dx in zip(f, steps):
            c = _cumulative_simpson(vals, dx) + offset
            out.append(c)
            offset = c[-1]
        return out

    omega = {1: integrate(samples)}
    S = {}
    for n in range(2, n_max + 1):
        S[(n, 1)] = [_comm(o, a) for o, a in zip(omega[n - 1], samples)]
        for j in range(2, n):
            acc = None
            for m in range(1, n - j + 1):
                term = [_comm(o, s) for o, s in zip(omega[m], S[(n - m, j - 1)])]
                acc = term if acc is None else [x + y for x, y in zip(acc, term)]
            S[(n, j)] = acc
        integrand = None
        for j in range(1, n):
            coef = BERNOULLI[j] / factorial(j)
            if coef == 0.0:
                continue
            part = [coef * s for s in S[(n, j)]]
            integrand = part if integrand is None else [x + y for x, y in zip(integrand, part)]
        if integrand is None:
            integrand = [np.zeros_like(v) for v in samples]
        omega[n] = integrate(integrand)
    terms = tuple(omega[n][-1][-1] for n in range(1, n_max + 1))
    return MagnusTerms(terms, (t0, t))


def convergence_margin(A: Callable[[float], np.ndarray], t0: float, t: float, grid: int = 256) -> float:
    """Composite-Simpson value of the integral of ||A(s)||_2 over [t0, t].

    The Magnus series is guaranteed to converge while this stays below pi.
    """
    if grid < 8 or grid % 2:
        raise MagnusError("grid must be even and at least 8")
    x = np.linspace(t0, t, grid + 1)
    vals = [spectral_norm(A(float(xi)), tol=1e-13) for xi in x]
    return float(abs(simpson(vals, x=x)))


def bch_terms(X1, X2, order: int = 4) -> list:
    """Leading homogeneous terms of log(exp(X1) exp(X2)), grades 1..order."""
    if not 1 <= order <= 4:
        raise OrderNotSupported("BCH terms are available up to grade 4")
    X1 = np.asarray(X1, dtype=complex)
    X2 = np.asarray(X2, dtype=complex)
    c12 = commutator(X1, X2)
    terms = [
        X1 + X2,
        0.5 * c12,
        (commutator(X1, c12) - commutator(X2, c12)) / 12.0,
        commutator(X1, commutator(X2, commutator(X2, X1))) / 24.0,
    ]
    return terms[:order]


def wilcox_terms(terms: MagnusTerms) -> list:
    """First four factors of exp(W1) exp(W2) exp(W3) exp(W4) ... = exp(sum Omega)."""
    om = terms.terms
    if len(om) < 4:
        raise MagnusError("Wilcox terms need at least four Magnus terms")
    o1, o2, o3, o4 = om[:4]
    w3 = o3 - 0.5 * commutator(o1, o2)
    w4 = o4 - 0.5 * commutator(o1, o3) + commutator(o1, commutator(o1, o2)) / 6.0
    return [o1, o2, w3, w4]
