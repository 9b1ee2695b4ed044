"""Dirichlet eigenvalues of -phi'' + V(x) phi = lambda phi by Magnus shooting.

The equation is written as y' = [[0, 1], [V - lambda, 0]] y with y = (phi, phi').
Each subinterval contributes one SL(2) exponential, so transfer matrices have
unit determinant by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import FlatMismatchError, MagnusError, NotConvergedError
from .expansion import GradedAlphas, omega_truncated
from .linalg import EPS, sl2_exp_batch
from .quadrature import GL2, GL3, quadrature_transform


@dataclass(frozen=True)
class SLProblem:
    V: Callable[[float], float]
    a: float
    b: float
    N: int = 200
    order: int = 4
    label: str = ""

    def __post_init__(self):
        if not self.b > self.a:
            raise MagnusError("interval needs b > a")
        if self.N < 4:
            raise MagnusError("N must be at least 4")
        if self.order not in (4, 6):
            raise MagnusError("shooting order must be 4 or 6")

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.N


def _potential_samples(prob: SLProblem) -> np.ndarray:
    rule = GL2 if prob.order == 4 else GL3
    x = prob.a + prob.h * np.arange(prob.N)
    nodes = x[:, None] + prob.h * np.asarray(rule.nodes)[None, :]
    return np.vectorize(prob.V, otypes=[float])(nodes)


def _exponents(prob: SLProblem, lam: float, Vs) -> np.ndarray:
    """Stack of truncated Magnus exponents sigma_n(lambda), shape (N, 2, 2)."""
    rule, s = (GL2, 2) if prob.order == 4 else (GL3, 3)
    RQ = quadrature_transform(rule, s).RQ
    coef = prob.h * (Vs - lam) @ RQ.T  # (N, s): weights of the lower-left entry
    top = prob.h * RQ.sum(axis=1)  # upper-right entry, same for every n
    alphas = []
    for i in range(s):
        al = np.zeros((Vs.shape[0], 2, 2))
        al[:, 0, 1] = top[i]
        al[:, 1, 0] = coef[:, i]
        alphas.append(al)
    return omega_truncated(GradedAlphas(prob.h, tuple(alphas)), prob.order)


def shoot(prob: SLProblem, lam: float, _samples=None):
    """Propagate (0, 1) from a to b; returns (phi(b), transfer matrix)."""
    Vs = _potential_samples(prob) if _samples is None else _samples
    E = sl2_exp_batch(_exponents(prob, lam, Vs))
    T = np.eye(2)
    for M in E:
        T = M @ T
    return float(T[0, 1]), T


def _mismatch(prob: SLProblem, Vs):
    return lambda lam: shoot(prob, lam, Vs)[0]


def find_eigenvalue(prob: SLProblem, lambda_guess: float, tol: float = 1e-10, max_iter: int = 50, _samples=None) -> float:
    """Newton iteration on phi(b; lambda) = 0 with a centred difference slope."""
    if tol <= 0 or max_iter < 1:
        raise MagnusError("need tol > 0 and max_iter >= 1")
    f = _mismatch(prob, _potential_samples(prob) if _samples is None else _samples)
    lam = float(lambda_guess)
    for _ in range(max_iter):
        d = np.sqrt(EPS) * max(1.0, abs(lam))
        fl = f(lam)
        slope = (f(lam + d) - f(lam - d)) / (2 * d)
        if slope == 0.0 or not np.isfinite(slope):
            raise FlatMismatchError("flat-mismatch")
        step = fl / slope
        lam -= step
        if abs(step) <= tol * max(1.0, abs(lam)):
            return lam
    raise NotConvergedError(f"Newton did not converge in {max_iter} iterations", last=lam)


def check_step_guard(prob: SLProblem, lambda_max: float) -> None:
    """Shooting accuracy degrades once h exceeds ~|lambda|^(-1/4)."""
    if lambda_max > 0 and prob.h > 0.8 * lambda_max ** -0.25:
        raise MagnusError(
            f"step {prob.h:.3g} too large for lambda up to {lambda_max:.3g}; increase N"
        )


def scan_eigenvalues(prob: SLProblem, lambda_min: float, lambda_max: float, scan_step: float) -> list:
    """Bracket sign changes of phi(b; lambda) on a grid and refine each by Newton."""
    if scan_step <= 0:
        raise MagnusError("scan_step must be positive")
    check_step_guard(prob, max(abs(lambda_min), abs(lambda_max)))
    Vs = _potential_samples(prob)
    f = _mismatch(prob, Vs)
    grid = np.arange(lambda_min, lambda_max + 0.5 * scan_step, scan_step)
    vals = [f(x) for x in grid]
    found = []
    for lo, hi, flo, fhi in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if flo == 0.0:
            found.append(float(lo))
            continue
        if flo * fhi > 0:
            continue
        try:
            lam = find_eigenvalue(prob, 0.5 * (lo + hi), _samples=Vs)
        except (NotConvergedError, FlatMismatchError):
            lam = None
        if lam is None or not lo - scan_step <= lam <= hi + scan_step:
            # Newton escaped the bracket; fall back to bisection-type refinement
            lam = brentq(f, lo, hi, xtol=1e-14, rtol=4 * EPS)
        found.append(float(lam))
    found.sort()
    out = []
    for lam in found:
        if not out or abs(lam - out[-1]) > 1e-6 * (1 + abs(lam)):
            out.append(lam)
    return out
