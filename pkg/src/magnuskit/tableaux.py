"""Butcher tableaux for the Runge-Kutta reference integrators."""

from dataclasses import dataclass

import numpy as np

from .errors import MagnusError

_S3 = np.sqrt(3.0)
_S5 = np.sqrt(5.0)
_S15 = np.sqrt(15.0)


@dataclass(frozen=True)
class ButcherTableau:
    name: str
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    order: int

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        c = np.asarray(self.c, dtype=float)
        s = b.size
        if a.shape != (s, s) or c.shape != (s,):
            raise MagnusError(f"inconsistent tableau shapes for {self.name}")
        if np.max(np.abs(a.sum(axis=1) - c)) > 1e-14:
            raise MagnusError(f"tableau {self.name}: c_i != sum_j a_ij")
        for arr in (a, b, c):
            arr.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def stages(self) -> int:
        return self.b.size

    @property
    def explicit(self) -> bool:
        return bool(np.all(np.triu(self.a) == 0.0))


EULER = ButcherTableau("E1", [[0.0]], [1.0], [0.0], 1)

RK4 = ButcherTableau(
    "RK4",
    [[0, 0, 0, 0], [0.5, 0, 0, 0], [0, 0.5, 0, 0], [0, 0, 1, 0]],
    [1 / 6, 2 / 6, 2 / 6, 1 / 6],
    [0, 0.5, 0.5, 1],
    4,
)

# 7-stage, sixth order; only three distinct new abscissae per step
RK6 = ButcherTableau(
    "RK6",
    [
        [0, 0, 0, 0, 0, 0, 0],
        [(5 - _S5) / 10, 0, 0, 0, 0, 0, 0],
        [-_S5 / 10, (5 + 2 * _S5) / 10, 0, 0, 0, 0, 0],
        [(-15 + 7 * _S5) / 20, (-1 + _S5) / 4, (15 - 7 * _S5) / 10, 0, 0, 0, 0],
        [(5 - _S5) / 60, 0, 1 / 6, (15 + 7 * _S5) / 60, 0, 0, 0],
        [(5 + _S5) / 60, 0, (9 - 5 * _S5) / 12, 1 / 6, (-5 + 3 * _S5) / 10, 0, 0],
        [1 / 6, 0, (-55 + 25 * _S5) / 12, (-25 - 7 * _S5) / 12, 5 - 2 * _S5, (5 + _S5) / 2, 0],
    ],
    [1 / 12, 0, 0, 0, 5 / 12, 5 / 12, 1 / 12],
    [0, (5 - _S5) / 10, (5 + _S5) / 10, (5 - _S5) / 10, (5 + _S5) / 10, (5 - _S5) / 10, 1],
    6,
)

GL_RK4 = ButcherTableau(
    "GL-RK4",
    [[0.25, (3 - 2 * _S3) / 12], [(3 + 2 * _S3) / 12, 0.25]],
    [0.5, 0.5],
    [(3 - _S3) / 6, (3 + _S3) / 6],
    4,
)

GL_RK6 = ButcherTableau(
    "GL-RK6",
    [
        [5 / 36, 2 / 9 - _S15 / 15, 5 / 36 - _S15 / 30],
        [5 / 36 + _S15 / 24, 2 / 9, 5 / 36 - _S15 / 24],
        [5 / 36 + _S15 / 30, 2 / 9 + _S15 / 15, 5 / 36],
    ],
    [5 / 18, 4 / 9, 5 / 18],
    [(5 - _S15) / 10, 0.5, (5 + _S15) / 10],
    6,
)

TABLEAUX = {t.name: t for t in (EULER, RK4, RK6, GL_RK4, GL_RK6)}
