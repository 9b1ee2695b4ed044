"""Explicit Magnus-type steppers for nonlinear matrix equations.

Group variant: Y' = A(t, Y) Y.  Isospectral variant: Y' = [A(t, Y), Y], solved
by conjugation Y -> exp(Omega) Y exp(-Omega) so the spectrum is kept exactly
up to roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import MagnusError, StructureError
from .linalg import StructureTag, as_matrix, commutator, expm, frobenius_norm
from .quadrature import GL2


@dataclass
class NonlinearProblem:
    dim: int
    A: Callable[[float, np.ndarray], np.ndarray]
    variant: str
    Y0: np.ndarray
    structure: StructureTag = field(default_factory=StructureTag)
    label: str = ""
    t0: float = 0.0
    tf: float = 1.0

    def __post_init__(self):
        if self.variant not in ("group", "isospectral"):
            raise MagnusError(f"unknown variant {self.variant!r}")
        Y0 = as_matrix(self.Y0, self.dim)
        self.Y0 = Y0
        if self.variant == "isospectral":
            scale = max(1.0, frobenius_norm(Y0))
            if frobenius_norm(Y0 - Y0.T) > 1e-12 * scale:
                raise StructureError("isospectral problems need a symmetric Y0")
            A0 = as_matrix(self.A(self.t0, Y0), self.dim)
            if frobenius_norm(A0 + A0.T) > 1e-12 * max(1.0, frobenius_norm(A0)):
                raise StructureError("isospectral problems need a skew-symmetric A(t, Y)")


def nl_magnus_step(prob: NonlinearProblem, t: float, h: float, Y) -> np.ndarray:
    """Second-order explicit step: half-step predictor, midpoint exponent."""
    Y = np.asarray(Y, dtype=complex)
    Yhalf = expm(0.5 * h * prob.A(t, Y)) @ Y
    v = h * np.asarray(prob.A(t + 0.5 * h, Yhalf), dtype=complex)
    return expm(v) @ Y


def _isospectral_omega(prob: NonlinearProblem, order: int, t: float, h: float, Y) -> np.ndarray:
    A0 = np.asarray(prob.A(t, Y), dtype=complex)
    if order == 2:
        return h * np.asarray(prob.A(t + 0.5 * h, Y + 0.5 * h * commutator(A0, Y)), dtype=complex)
    if order == 3:
        Omega = np.zeros_like(Y)
        for c, b in zip(GL2.nodes, GL2.weights):
            # second-order exponent over [t, t + c h] predicts the state at the node
            O2 = c * h * np.asarray(prob.A(t + 0.5 * c * h, Y + 0.5 * c * h * commutator(A0, Y)), dtype=complex)
            OY = commutator(O2, Y)
            theta = Y + OY + 0.5 * commutator(O2, OY)
            F = np.asarray(prob.A(t + c * h, theta), dtype=complex)
            Omega = Omega + h * b * (F - 0.5 * commutator(O2, F))
        return Omega
    raise MagnusError(f"isospectral scheme of order {order} not available")


def isospectral_step(prob: NonlinearProblem, order: int, t: float, h: float, Y) -> np.ndarray:
    Y = np.asarray(Y, dtype=complex)
    Omega = _isospectral_omega(prob, order, t, h, Y)
    E = expm(Omega)
    return E @ Y @ expm(-Omega)


def integrate_nonlinear(prob: NonlinearProblem, t0: float, tf: float, n_steps: int, order: int = 2, record: bool = False):
    """Fixed-step run from ``prob.Y0``; with ``record`` all states are returned."""
    if n_steps < 1 or not tf > t0:
        raise MagnusError("need tf > t0 and n_steps >= 1")
    grid = t0 + (tf - t0) * np.arange(n_steps + 1) / n_steps
    Y = prob.Y0.copy()
    path = [Y] if record else None
    for n in range(n_steps):
        h = grid[n + 1] - grid[n]
        if prob.variant == "group":
            if order != 2:
                raise MagnusError("the group variant has only the second-order scheme")
            Y = nl_magnus_step(prob, grid[n], h, Y)
        else:
            Y = isospectral_step(prob, order, grid[n], h, Y)
        if record:
            path.append(Y)
    return path if record else Y


def double_bracket_problem(N, Y0, t0: float = 0.0, tf: float = 1.0) -> NonlinearProblem:
    """Y' = [[N, Y], Y]; trace(Y N) increases along the flow."""
    N = as_matrix(N)

    def A(t, Y):
        return commutator(N, Y)

    return NonlinearProblem(N.shape[0], A, "isospectral", Y0, StructureTag("skew-symmetric"), "double-bracket", t0, tf)
