"""Dense complex matrix kernel.

Every matrix handled by the package is a square ``complex128`` numpy array.
Functions here never modify their arguments.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import factorial
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import (
    DimensionError,
    PadeDenominatorSingular,
    SingularSystemError,
    StructureError,
)

EPS = np.finfo(float).eps

SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA1, SIGMA2, SIGMA3)

# (6,6) diagonal Pade numerator coefficients, c_k = (12-k)! 6! / (12! k! (6-k)!)
_PADE6 = tuple(
    factorial(12 - k) * factorial(6) / (factorial(12) * factorial(k) * factorial(6 - k))
    for k in range(7)
)


def as_matrix(A, dim: Optional[int] = None) -> np.ndarray:
    """Validate ``A`` as a finite square matrix and return it as complex128."""
    M = np.asarray(A, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {M.shape}")
    if dim is not None and M.shape[0] != dim:
        raise DimensionError(f"expected dimension {dim}, got {M.shape[0]}")
    if not np.all(np.isfinite(M)):
        raise StructureError("matrix has non-finite entries")
    return M


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex)


def commutator(A, B) -> np.ndarray:
    """Return ``AB - BA``."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise DimensionError(f"commutator of shapes {A.shape} and {B.shape}")
    return A @ B - B @ A


def frobenius_norm(A) -> float:
    return float(np.linalg.norm(A, "fro"))


def norm1(A) -> float:
    return float(np.max(np.sum(np.abs(A), axis=0)))


def spectral_norm(A, tol: float = 1e-10) -> float:
    """Estimate the 2-norm of ``A`` by power iteration on ``A^H A``.

    The result always lies in ``[||A||_F / sqrt(n) / (1 + tol), ||A||_F]``.
    If the iteration stalls, the Frobenius norm is returned, which is a valid
    upper bound.
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    fro = frobenius_norm(A)
    if fro == 0.0:
        return 0.0
    # start from the heaviest column: never orthogonal to the dominant singular vector
    j = int(np.argmax(np.sum(np.abs(A) ** 2, axis=0)))
    v = A.conj().T @ A[:, j]
    v /= np.linalg.norm(v)
    est = 0.0
    converged = False
    for _ in range(200):
        w = A.conj().T @ (A @ v)
        new = float(np.real(np.vdot(v, w)))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            break
        v = w / nw
        if est > 0.0 and abs(new - est) <= tol * new:
            est = new
            converged = True
            break
        est = new
    sigma = min(np.sqrt(max(est, 0.0)), fro)
    if not converged or fro > np.sqrt(n) * sigma * (1.0 + tol):
        return fro
    return float(sigma)


def solve_linear(A, B) -> np.ndarray:
    """Solve ``AX = B`` by LU with partial pivoting."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n or B.shape[0] != n:
        raise DimensionError(f"cannot solve system with shapes {A.shape}, {B.shape}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    threshold = n * EPS * frobenius_norm(A)
    if threshold == 0.0 or np.min(np.abs(np.diag(lu))) < threshold:
        raise SingularSystemError("singular-system")
    return scipy.linalg.lu_solve((lu, piv), B, check_finite=False)


def expm(A) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a (6,6) Pade approximant.

    The matrix is scaled by ``2**-k`` until its 1-norm is at most 0.5.
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    nrm = norm1(A)
    k = 0
    if nrm > 0.5:
        k = int(np.ceil(np.log2(nrm / 0.5)))
    X = A / (2.0**k) if k else A
    I = np.eye(n, dtype=complex)
    X2 = X @ X
    X4 = X2 @ X2
    X6 = X4 @ X2
    c = _PADE6
    even = c[0] * I + c[2] * X2 + c[4] * X4 + c[6] * X6
    odd = X @ (c[1] * I + c[3] * X2 + c[5] * X4)
    R = np.linalg.solve(even - odd, even + odd)
    for _ in range(k):
        R = R @ R
    return R


def _sinhc_sq(x: complex) -> complex:
    """sinh(eta)/eta as a function of x = eta**2."""
    if abs(x) < 1e-8:
        # |eta| < 1e-4
        return 1.0 + x / 6.0 + x * x / 120.0 + x**3 / 5040.0
    eta = np.sqrt(complex(x))
    return complex(np.sinh(eta) / eta)


def sl2_exp_batch(M) -> np.ndarray:
    """Closed-form exponentials of a stack of real traceless 2x2 matrices."""
    M = np.asarray(M, dtype=float)
    a, b, c = M[:, 0, 0], M[:, 0, 1], M[:, 1, 0]
    x = a * a + b * c
    r = np.sqrt(np.abs(x))
    ch = np.where(x >= 0, np.cosh(r), np.cos(r))
    small = np.abs(x) < 1e-8
    with np.errstate(invalid="ignore", divide="ignore"):
        big = np.where(x >= 0, np.sinh(r), np.sin(r)) / np.where(small, 1.0, r)
    # |eta| < 1e-4: Taylor series of sinh(eta)/eta in eta**2
    sh = np.where(small, 1.0 + x / 6.0 + x * x / 120.0 + x**3 / 5040.0, big)
    out = np.empty_like(M)
    out[:, 0, 0] = ch + a * sh
    out[:, 0, 1] = b * sh
    out[:, 1, 0] = c * sh
    out[:, 1, 1] = ch - a * sh
    return out


def closed_form_exp(form: str, A) -> np.ndarray:
    """Exact exponential of a traceless 2x2 matrix.

    ``form='sl2'`` expects a real traceless matrix ``[[a, b], [c, -a]]``;
    ``form='su2'`` expects ``i (a . sigma)``, a skew-Hermitian traceless matrix.
    """
    A = as_matrix(A)
    if A.shape != (2, 2):
        raise StructureError("closed-form exponential needs a 2x2 matrix")
    scale = max(1.0, float(np.max(np.abs(A))))
    if abs(A[0, 0] + A[1, 1]) > 1e-12 * scale:
        raise StructureError("matrix is not traceless")
    if form == "sl2":
        if np.max(np.abs(A.imag)) > 1e-12 * scale:
            raise StructureError("sl2 form needs a real matrix")
        return sl2_exp_batch(A.real[None])[0].astype(complex)
    if form == "su2":
        if np.max(np.abs(A + A.conj().T)) > 1e-12 * scale:
            raise StructureError("su2 form needs a skew-Hermitian matrix")
        a1, a2, a3 = A[0, 1].imag, A[0, 1].real, A[0, 0].imag
        asq = a1 * a1 + a2 * a2 + a3 * a3
        # sin(a)/a = sinh(i a)/(i a)
        sa = _sinhc_sq(-asq).real
        return np.cos(np.sqrt(asq)) * np.eye(2, dtype=complex) + sa * A
    raise StructureError(f"unknown closed form {form!r}")


def pade_poly_coeffs(m: int) -> np.ndarray:
    """Coefficients (ascending powers) of P_m with P_0 = 1, P_1 = 2 + x and
    P_m = 2(2m-1) P_{m-1} + x^2 P_{m-2}."""
    if m < 0:
        raise ValueError("m must be non-negative")
    prev2 = np.array([1.0])
    if m == 0:
        return prev2
    prev = np.array([2.0, 1.0])
    for k in range(2, m + 1):
        cur = np.zeros(k + 1)
        cur[: prev.size] += 2 * (2 * k - 1) * prev
        cur[2 : 2 + prev2.size] += prev2
        prev2, prev = prev, cur
    return prev


def _polyval_matrix(coeffs, B) -> np.ndarray:
    n = B.shape[0]
    R = coeffs[-1] * np.eye(n, dtype=complex)
    for c in coeffs[-2::-1]:
        R = R @ B + c * np.eye(n, dtype=complex)
    return R


def pade_lie_map(B, m: int) -> np.ndarray:
    """Diagonal Pade map ``P_m(B) P_m(-B)^{-1}``; ``m = 1`` is the Cayley transform.

    Agrees with ``expm(B)`` up to ``O(B^(2m+1))`` and maps the J-orthogonal
    algebra into the J-orthogonal group.
    """
    if m < 1:
        raise ValueError("pade_lie_map needs m >= 1")
    B = np.asarray(B, dtype=complex)
    coeffs = pade_poly_coeffs(m)
    num = _polyval_matrix(coeffs, B)
    den = _polyval_matrix(coeffs, -B)
    try:
        # num and den commute, so den^{-1} num == num den^{-1}
        return solve_linear(den, num)
    except SingularSystemError as exc:
        raise PadeDenominatorSingular("pade-denominator-singular") from exc


def cayley(C) -> np.ndarray:
    """``(I - C/2)^{-1} (I + C/2)``."""
    C = np.asarray(C, dtype=complex)
    I = np.eye(C.shape[0], dtype=complex)
    return solve_linear(I - 0.5 * C, I + 0.5 * C)


def symplectic_J(n: int) -> np.ndarray:
    """The canonical ``2n x 2n`` symplectic matrix ``[[0, I], [-I, 0]]``."""
    J = np.zeros((2 * n, 2 * n), dtype=complex)
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


STRUCTURE_KINDS = (
    "none",
    "skew-hermitian",
    "skew-symmetric",
    "traceless",
    "j-orthogonal-algebra",
    "hamiltonian-block",
)


@dataclass(frozen=True)
class StructureTag:
    """Lie-algebra membership of a coefficient matrix.

    ``J`` is only used by ``j-orthogonal-algebra`` (and is implied for
    ``hamiltonian-block``).
    """

    kind: str = "none"
    J: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in STRUCTURE_KINDS:
            raise StructureError(f"unknown structure kind {self.kind!r}")
        if self.kind == "j-orthogonal-algebra":
            if self.J is None:
                raise StructureError("j-orthogonal-algebra needs J")
            J = as_matrix(self.J)
            if abs(np.linalg.det(J)) < 1e-12:
                raise StructureError("J must be invertible")
            J.setflags(write=False)
            object.__setattr__(self, "J", J)

    def metric(self, n: int) -> Optional[np.ndarray]:
        """The matrix J defining the quadratic group, if the tag has one."""
        if self.kind in ("skew-symmetric",):
            return np.eye(n, dtype=complex)
        if self.kind == "j-orthogonal-algebra":
            return self.J
        if self.kind == "hamiltonian-block":
            return symplectic_J(n // 2)
        return None

    @property
    def quadratic(self) -> bool:
        """True when the group is ``{Y : Y^T J Y = J}`` (Cayley/Pade preserve it)."""
        return self.kind in ("skew-symmetric", "j-orthogonal-algebra", "hamiltonian-block")

    def algebra_defect(self, M) -> float:
        M = np.asarray(M, dtype=complex)
        n = M.shape[0]
        if self.kind == "skew-hermitian":
            return frobenius_norm(M + M.conj().T)
        if self.kind == "traceless":
            return float(abs(np.trace(M)))
        J = self.metric(n)
        if J is not None:
            return frobenius_norm(M.T @ J + J @ M) + frobenius_norm(M.imag)
        return 0.0

    def group_defect(self, Y) -> float:
        Y = np.asarray(Y, dtype=complex)
        n = Y.shape[0]
        if self.kind == "skew-hermitian":
            return frobenius_norm(Y.conj().T @ Y - np.eye(n))
        if self.kind == "traceless":
            return float(abs(np.linalg.det(Y) - 1.0))
        J = self.metric(n)
        if J is not None:
            return frobenius_norm(Y.T @ J @ Y - J)
        return 0.0


def unitarity_defect(Y) -> float:
    Y = np.asarray(Y, dtype=complex)
    return frobenius_norm(Y.conj().T @ Y - np.eye(Y.shape[0]))


def det_defect(Y) -> float:
    return float(abs(np.linalg.det(np.asarray(Y, dtype=complex)) - 1.0))
