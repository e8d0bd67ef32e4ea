"""Continuous Lyapunov and discrete Lyapunov (Stein) equation solvers.

Solves ``F^H D + D F = C`` and ``D - B^H D B = C`` for Hermitian ``C`` by
complex Schur back-substitution, with dense Kronecker-product solves kept
as an independent (and O(n^6)) reference.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import schur, solve_triangular

from .exceptions import DimensionError, SingularOperatorError
from .structured import kron, unvec, vec

__all__ = [
    "LyapunovSolveReport",
    "solve_continuous_lyapunov", "solve_discrete_lyapunov",
    "kronecker_oracle_continuous", "kronecker_oracle_discrete",
    "continuous_lyapunov_operator", "discrete_lyapunov_operator",
]

SINGULAR_RTOL = 1e-13


@dataclass(frozen=True)
class LyapunovSolveReport:
    """Hermitian solution ``D`` with the recomputed Frobenius residual.

    ``spectral_margin`` is ``max Re(eig(F))`` for the continuous equation and
    the spectral radius of ``B`` for the discrete one.
    """

    solution: np.ndarray
    residual: float
    spectral_margin: float


def _check_pair(M, C, names):
    M = np.asarray(M)
    C = np.asarray(C)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"{names[0]} must be square, got shape {M.shape}")
    if C.shape != M.shape:
        raise DimensionError(
            f"{names[1]} has shape {C.shape}, expected {M.shape}")
    return M, C


def _hermitize(D):
    return (D + D.conj().T) / 2


def _is_real(*arrays):
    return not any(np.iscomplexobj(a) for a in arrays)


def solve_continuous_lyapunov(F, C):
    """Solve ``F^H D + D F = C``.

    Parameters
    ----------
    F : (n, n) array_like
        Coefficient matrix; the equation is uniquely solvable iff no two
        eigenvalues satisfy ``conj(l_i) + l_j = 0`` (e.g. ``F`` c-stable).
    C : (n, n) array_like
        Hermitian right-hand side.

    Returns
    -------
    LyapunovSolveReport

    Raises
    ------
    SingularOperatorError
        If some ``|conj(l_i) + l_j|`` falls below ``1e-13`` times the operator
        norm bound ``2 ||F||_F``.
    """
    F, C = _check_pair(F, C, ("F", "C"))
    n = F.shape[0]
    real = _is_real(F, C)
    T, U = schur(F.astype(complex), output="complex")
    lam = np.diag(T)
    gaps = np.abs(lam.conj()[:, None] + lam[None, :])
    scale = max(2.0 * np.linalg.norm(F), np.finfo(float).tiny)
    if gaps.min(initial=np.inf) <= SINGULAR_RTOL * scale:
        raise SingularOperatorError(
            "continuous Lyapunov operator is singular: conj(l_i) + l_j ~ 0")

    Ct = U.conj().T @ C @ U
    Dt = np.zeros((n, n), dtype=complex)
    TH = T.conj().T
    for j in range(n):
        rhs = Ct[:, j] - Dt[:, :j] @ T[:j, j]
        Dt[:, j] = solve_triangular(TH + T[j, j] * np.eye(n), rhs, lower=True)
    D = _hermitize(U @ Dt @ U.conj().T)
    if real:
        D = D.real
    residual = float(np.linalg.norm(F.conj().T @ D + D @ F - C))
    return LyapunovSolveReport(D, residual, float(lam.real.max()))


def solve_discrete_lyapunov(B, C):
    """Solve the Stein equation ``D - B^H D B = C``.

    Uniquely solvable iff ``conj(l_i) * l_j != 1`` for all eigenvalue pairs,
    in particular when ``B`` is d-stable.
    """
    B, C = _check_pair(B, C, ("B", "C"))
    n = B.shape[0]
    real = _is_real(B, C)
    T, U = schur(B.astype(complex), output="complex")
    lam = np.diag(T)
    gaps = np.abs(1.0 - lam.conj()[:, None] * lam[None, :])
    scale = max(1.0 + np.linalg.norm(B) ** 2, np.finfo(float).tiny)
    if gaps.min(initial=np.inf) <= SINGULAR_RTOL * scale:
        raise SingularOperatorError(
            "Stein operator is singular: conj(l_i) * l_j ~ 1")

    Ct = U.conj().T @ C @ U
    Dt = np.zeros((n, n), dtype=complex)
    TH = T.conj().T
    eye = np.eye(n)
    for j in range(n):
        rhs = Ct[:, j] + TH @ (Dt[:, :j] @ T[:j, j])
        Dt[:, j] = solve_triangular(eye - T[j, j] * TH, rhs, lower=True)
    D = _hermitize(U @ Dt @ U.conj().T)
    if real:
        D = D.real
    residual = float(np.linalg.norm(D - B.conj().T @ D @ B - C))
    return LyapunovSolveReport(D, residual, float(np.abs(lam).max(initial=0.0)))


def continuous_lyapunov_operator(F):
    """Kronecker matrix ``I (x) F^H + F^T (x) I`` of ``D -> F^H D + D F``."""
    F = np.asarray(F)
    eye = np.eye(F.shape[0])
    return kron(eye, F.conj().T) + kron(F.T, eye)


def discrete_lyapunov_operator(B):
    """Kronecker matrix ``I - B^T (x) B^H`` of ``D -> D - B^H D B``."""
    B = np.asarray(B)
    return np.eye(B.shape[0] ** 2) - kron(B.T, B.conj().T)


def _dense_solve(K, C):
    n = C.shape[0]
    s = np.linalg.svd(K, compute_uv=False)
    if s[-1] <= SINGULAR_RTOL * s[0]:
        raise SingularOperatorError("Kronecker operator matrix is singular")
    return unvec(np.linalg.solve(K, vec(C)), n, n)


def kronecker_oracle_continuous(F, C):
    """Reference solve of ``F^H D + D F = C`` through its n^2 x n^2 matrix."""
    F, C = _check_pair(F, C, ("F", "C"))
    return _dense_solve(continuous_lyapunov_operator(F), C)


def kronecker_oracle_discrete(B, C):
    """Reference solve of ``D - B^H D B = C`` through its n^2 x n^2 matrix."""
    B, C = _check_pair(B, C, ("B", "C"))
    return _dense_solve(discrete_lyapunov_operator(B), C)
