"""Quadrature rules on [0, 1] and the moment transforms built from them."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import MagnusError

_S3 = np.sqrt(3.0)
_S15 = np.sqrt(15.0)


@dataclass(frozen=True)
class QuadratureRule:
    name: str
    nodes: tuple
    weights: tuple
    order: int
    flavor: str  # "gauss-legendre" | "newton-cotes"

    def __post_init__(self):
        c = np.asarray(self.nodes)
        b = np.asarray(self.weights)
        if c.shape != b.shape or c.ndim != 1:
            raise MagnusError("nodes and weights must be matching vectors")
        if np.any(np.diff(c) <= 0):
            raise MagnusError("quadrature nodes must be strictly increasing")
        if abs(b.sum() - 1.0) > 1e-14:
            raise MagnusError("quadrature weights must sum to one")

    @property
    def k(self) -> int:
        return len(self.nodes)

    @property
    def symmetric(self) -> bool:
        c = np.asarray(self.nodes)
        b = np.asarray(self.weights)
        return bool(np.allclose(c + c[::-1], 1.0, atol=1e-15) and np.allclose(b, b[::-1], atol=1e-15))

    @property
    def endpoints(self) -> bool:
        """True if the rule samples both ends, so the last sample can be reused."""
        return self.nodes[0] == 0.0 and self.nodes[-1] == 1.0


GL1 = QuadratureRule("gl1", (0.5,), (1.0,), 2, "gauss-legendre")
GL2 = QuadratureRule("gl2", (0.5 - _S3 / 6, 0.5 + _S3 / 6), (0.5, 0.5), 4, "gauss-legendre")
GL3 = QuadratureRule(
    "gl3",
    (0.5 - _S15 / 10, 0.5, 0.5 + _S15 / 10),
    (5 / 18, 4 / 9, 5 / 18),
    6,
    "gauss-legendre",
)
NC3 = QuadratureRule("nc3", (0.0, 0.5, 1.0), (1 / 6, 2 / 3, 1 / 6), 4, "newton-cotes")
NC5 = QuadratureRule(
    "nc5",
    (0.0, 0.25, 0.5, 0.75, 1.0),
    (7 / 90, 32 / 90, 12 / 90, 32 / 90, 7 / 90),
    6,
    "newton-cotes",
)

RULES = {r.name: r for r in (GL1, GL2, GL3, NC3, NC5)}


def taylor_to_moment_matrix(s: int) -> np.ndarray:
    """T^(s): maps graded alphas to normalized moments A^(0..s-1)."""
    T = np.zeros((s, s))
    for i in range(s):
        for j in range(1, s + 1):
            T[i, j - 1] = (1 - (-1) ** (i + j)) / ((i + j) * 2.0 ** (i + j))
    return T


@dataclass(frozen=True)
class QuadratureTransform:
    """Moment matrix Q (s x k), its inverse change of basis R (s x s) and RQ."""

    s: int
    rule: QuadratureRule
    Q: np.ndarray
    R: np.ndarray
    RQ: np.ndarray


@lru_cache(maxsize=None)
def quadrature_transform(rule: QuadratureRule, s: int) -> QuadratureTransform:
    if s < 1 or s > rule.k or rule.order < 2 * s:
        raise MagnusError(
            f"rule {rule.name} (k={rule.k}, order {rule.order}) cannot resolve {s} graded terms"
        )
    c = np.asarray(rule.nodes)
    b = np.asarray(rule.weights)
    Q = np.array([b * (c - 0.5) ** i for i in range(s)])
    R = np.linalg.inv(taylor_to_moment_matrix(s))
    # R is integral-valued for s <= 3; snap away inversion roundoff
    R = np.where(np.abs(R - np.round(R)) < 1e-9, np.round(R), R)
    for arr in (Q, R):
        arr.setflags(write=False)
    RQ = R @ Q
    RQ.setflags(write=False)
    return QuadratureTransform(s, rule, Q, R, RQ)
