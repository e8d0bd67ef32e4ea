"""Stabilizing solutions of the symmetric CARE and DARE.

CARE:  ``Q + A^H X + X A - X G X = 0``
DARE:  ``Y - A^H Y (I + G Y)^{-1} A - Q = 0``

with Hermitian positive semidefinite ``G`` and ``Q``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.linalg import schur

from .exceptions import (ConvergenceError, DimensionError, NoStabilizingSolutionError,
                         StructureError)
from .lyapunov import solve_continuous_lyapunov, solve_discrete_lyapunov

__all__ = [
    "RiccatiProblem", "RiccatiSolution",
    "solve_care", "solve_dare", "solve",
    "care_residual", "dare_residual", "newton_refine_care", "newton_refine_dare",
    "care_closed_loop", "dare_closed_loop",
]

log = logging.getLogger(__name__)

HERMITIAN_RTOL = 1e-12
PSD_RTOL = 1e-10


def _hermitian_defect(M):
    return np.linalg.norm(M - M.conj().T)


@dataclass(frozen=True)
class RiccatiProblem:
    """Reduced-form Riccati data ``(A, G, Q)``.

    ``field`` is inferred from the data when omitted.  Set ``check_psd=False``
    to accept slightly indefinite ``G``/``Q``, e.g. after finite-difference
    perturbations; Hermitian structure is always enforced.
    """

    kind: str
    A: np.ndarray
    G: np.ndarray
    Q: np.ndarray
    field: str = None
    check_psd: bool = dc_field(default=True, repr=False, compare=False)

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in ("care", "dare"):
            raise ValueError(f"kind must be 'care' or 'dare', got {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        mats = [np.array(M) for M in (self.A, self.G, self.Q)]
        n = mats[0].shape[0] if mats[0].ndim == 2 else -1
        for name, M in zip("AGQ", mats):
            if M.ndim != 2 or M.shape != (n, n):
                raise DimensionError(f"{name} must be {n}x{n}, got shape {M.shape}")
        is_complex = any(np.iscomplexobj(M) and np.any(M.imag != 0) for M in mats)
        fld = self.field or ("complex" if is_complex else "real")
        if fld not in ("real", "complex"):
            raise ValueError(f"field must be 'real' or 'complex', got {fld!r}")
        if fld == "real" and is_complex:
            raise StructureError("field='real' but the data has nonzero imaginary parts")
        dtype = float if fld == "real" else complex
        mats = [(M.real if fld == "real" else M).astype(dtype) for M in mats]
        for name, M in zip("GQ", mats[1:]):
            nrm = np.linalg.norm(M)
            if _hermitian_defect(M) > HERMITIAN_RTOL * max(nrm, 1.0):
                raise StructureError(f"{name} is not Hermitian")
            if self.check_psd and n > 0:
                lo = np.linalg.eigvalsh((M + M.conj().T) / 2)[0]
                if lo < -PSD_RTOL * max(np.linalg.norm(M, 2), 1e-300):
                    raise StructureError(
                        f"{name} is not positive semidefinite (min eigenvalue {lo:.3e})")
        for M in mats:
            M.flags.writeable = False
        object.__setattr__(self, "A", mats[0])
        object.__setattr__(self, "G", mats[1])
        object.__setattr__(self, "Q", mats[2])
        object.__setattr__(self, "field", fld)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def is_real(self):
        return self.field == "real"

    @classmethod
    def from_factors(cls, kind, A, B, R, C=None, Q=None):
        """Build the reduced form from ``G = B R^{-1} B^H`` and ``Q = C^H C``.

        Exactly one of ``C`` and ``Q`` must be given.
        """
        B = np.atleast_2d(np.asarray(B))
        R = np.atleast_2d(np.asarray(R))
        G = B @ np.linalg.solve(R, B.conj().T)
        G = (G + G.conj().T) / 2
        if (C is None) == (Q is None):
            raise ValueError("give exactly one of C and Q")
        if Q is None:
            C = np.atleast_2d(np.asarray(C))
            Q = C.conj().T @ C
        return cls(kind, np.asarray(A), G, np.asarray(Q))

    def perturbed(self, dA, dG, dQ, check_psd=False):
        """Problem with data ``(A + dA, G + dG, Q + dQ)``."""
        fld = self.field
        if any(np.iscomplexobj(M) and np.any(np.imag(M) != 0) for M in (dA, dG, dQ)):
            fld = "complex"
        return RiccatiProblem(self.kind, self.A + dA, self.G + dG, self.Q + dQ,
                              field=fld, check_psd=check_psd)


@dataclass(frozen=True)
class RiccatiSolution:
    """Stabilizing solution with residual and closed-loop certificate.

    ``closed_loop`` is ``A - G X`` (CARE) or ``(I + G Y)^{-1} A`` (DARE);
    ``stability_margin`` is ``-max Re eig`` or ``1 - spectral radius`` of it.
    """

    solution: np.ndarray
    residual: float
    closed_loop: np.ndarray
    stability_margin: float
    iterations: int = 0


def care_residual(problem, X):
    """Frobenius norm of ``Q + A^H X + X A - X G X``."""
    A, G, Q = problem.A, problem.G, problem.Q
    X = np.asarray(X)
    if X.shape != A.shape:
        raise DimensionError(f"X has shape {X.shape}, expected {A.shape}")
    return float(np.linalg.norm(Q + A.conj().T @ X + X @ A - X @ G @ X))


def _dare_w(problem, Y):
    n = problem.n
    M = np.eye(n) + problem.G @ Y
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > 1 / np.finfo(float).eps:
        raise NoStabilizingSolutionError("I + G Y is numerically singular")
    return np.linalg.inv(M)


def dare_residual(problem, Y):
    """Frobenius norm of ``Y - A^H Y (I + G Y)^{-1} A - Q``."""
    A, Q = problem.A, problem.Q
    Y = np.asarray(Y)
    if Y.shape != A.shape:
        raise DimensionError(f"Y has shape {Y.shape}, expected {A.shape}")
    W = _dare_w(problem, Y)
    return float(np.linalg.norm(Y - A.conj().T @ Y @ W @ A - Q))


def care_closed_loop(problem, X):
    return problem.A - problem.G @ X


def dare_closed_loop(problem, Y):
    return _dare_w(problem, Y) @ problem.A


def _cast(problem, M):
    M = (M + M.conj().T) / 2
    if problem.is_real:
        return M.real.copy()
    return M


def _enforce_psd(M):
    """Clip tiny negative eigenvalues; larger violations mean the solver failed."""
    w, V = np.linalg.eigh(M)
    lo = w[0]
    if lo >= 0:
        return M
    top = max(abs(w[-1]), abs(lo))
    if lo < -PSD_RTOL * top:
        raise NoStabilizingSolutionError(
            f"computed solution is indefinite (min eigenvalue {lo:.3e})")
    w = np.clip(w, 0, None)
    out = (V * w) @ V.conj().T
    return (out + out.conj().T) / 2 if np.iscomplexobj(M) else out.real


def newton_refine_care(problem, X0, maxiter=8):
    """Newton-Kleinman polish of a stabilizing CARE iterate.

    Each step solves ``(A - G X_k)^H X + X (A - G X_k) = -Q - X_k G X_k``,
    written in correction form ``F^H E + E F = -R(X_k)`` so that the update
    keeps its relative accuracy.  Steps that do not reduce the residual are
    rejected, so the residual of the returned solution never exceeds that of
    ``X0``.
    """
    A, G, Q = problem.A, problem.G, problem.Q
    X = _cast(problem, np.asarray(X0))
    res = care_residual(problem, X)
    it = 0
    for it in range(1, maxiter + 1):
        F = A - G @ X
        if np.linalg.eigvals(F).real.max() >= 0:
            raise NoStabilizingSolutionError("Newton iterate lost closed-loop stability")
        R = Q + A.conj().T @ X + X @ A - X @ G @ X
        E = solve_continuous_lyapunov(F, -_cast(problem, R)).solution
        Xn = _cast(problem, X + E)
        rn = care_residual(problem, Xn)
        if not rn < res:
            it -= 1
            break
        X, res = Xn, rn
        if res == 0.0:
            break
    F = A - G @ X
    margin = -float(np.linalg.eigvals(F).real.max())
    if margin <= 0:
        raise NoStabilizingSolutionError("closed loop A - G X is not c-stable")
    return RiccatiSolution(X, res, F, margin, it)


def solve_care(problem, refine=True):
    """Stabilizing Hermitian p.s.d. solution of the CARE.

    The stable invariant subspace ``[U1; U2]`` of the Hamiltonian
    ``[[A, -G], [-Q, -A^H]]`` is taken from an ordered Schur form,
    ``X = U2 U1^{-1}``, then polished by Newton-Kleinman steps.

    Raises
    ------
    NoStabilizingSolutionError
        Hamiltonian eigenvalues on the imaginary axis, singular ``U1`` or an
        unstable/indefinite result.
    """
    if problem.kind != "care":
        raise ValueError("solve_care needs a CARE problem")
    A, G, Q = problem.A, problem.G, problem.Q
    n = problem.n
    H = np.block([[A, -G], [-Q, -A.conj().T]])
    ev = np.linalg.eigvals(H)
    hnorm = max(np.linalg.norm(H), np.finfo(float).tiny)
    if np.abs(ev.real).min() <= 100 * np.finfo(float).eps * hnorm:
        raise NoStabilizingSolutionError("Hamiltonian has eigenvalues on the imaginary axis")
    output = "real" if problem.is_real else "complex"
    T, Z, sdim = schur(H, output=output, sort="lhp")
    if sdim != n:
        raise NoStabilizingSolutionError(
            f"stable invariant subspace has dimension {sdim}, expected {n}")
    U1, U2 = Z[:n, :n], Z[n:, :n]
    if np.linalg.cond(U1) > 1 / np.finfo(float).eps:
        raise NoStabilizingSolutionError("stable subspace is not a graph (U1 singular)")
    X = _cast(problem, np.linalg.solve(U1.T, U2.T).T)
    if refine:
        sol = newton_refine_care(problem, X)
    else:
        F = A - G @ X
        sol = RiccatiSolution(X, care_residual(problem, X), F,
                              -float(np.linalg.eigvals(F).real.max()))
    Xp = _enforce_psd(sol.solution)
    if Xp is not sol.solution:
        F = A - G @ Xp
        sol = RiccatiSolution(Xp, care_residual(problem, Xp), F,
                              -float(np.linalg.eigvals(F).real.max()), sol.iterations)
    if sol.stability_margin <= 0:
        raise NoStabilizingSolutionError("closed loop A - G X is not c-stable")
    log.debug("CARE solved: residual %.3e, margin %.3e", sol.residual, sol.stability_margin)
    return sol


def _sda(problem, maxiter, tol):
    """Structure-preserving doubling; ``H_k`` converges to the stabilizing ``Y``."""
    n = problem.n
    Ak, Gk, Hk = problem.A.copy(), problem.G.copy(), problem.Q.copy()
    eye = np.eye(n)
    for k in range(1, maxiter + 1):
        W = eye + Gk @ Hk
        if not np.all(np.isfinite(W)) or np.linalg.cond(W) > 1 / np.finfo(float).eps:
            raise ConvergenceError("doubling iteration broke down (I + G_k H_k singular)")
        WA = np.linalg.solve(W, Ak)
        WG = np.linalg.solve(W, Gk)
        Hn = Hk + Ak.conj().T @ Hk @ WA
        Gk = Gk + Ak @ WG @ Ak.conj().T
        Ak = Ak @ WA
        Gk = (Gk + Gk.conj().T) / 2
        Hn = (Hn + Hn.conj().T) / 2
        if not np.all(np.isfinite(Hn)):
            raise ConvergenceError("doubling iteration diverged")
        step = np.linalg.norm(Hn - Hk)
        Hk = Hn
        if step <= tol * max(np.linalg.norm(Hk), np.finfo(float).tiny):
            return Hk, k
    raise ConvergenceError(f"doubling iteration did not converge in {maxiter} steps")


def _fixed_point(problem, maxiter, tol):
    A, G, Q = problem.A, problem.G, problem.Q
    Y = Q.copy()
    eye = np.eye(problem.n)
    for k in range(1, maxiter + 1):
        Yn = A.conj().T @ Y @ np.linalg.solve(eye + G @ Y, A) + Q
        Yn = (Yn + Yn.conj().T) / 2
        step = np.linalg.norm(Yn - Y)
        Y = Yn
        if not np.all(np.isfinite(Y)):
            break
        if step <= tol * max(np.linalg.norm(Y), np.finfo(float).tiny):
            return Y, k
    raise ConvergenceError("fixed-point iteration did not converge")


def newton_refine_dare(problem, Y0, maxiter=8):
    """Newton polish for the DARE through Stein solves.

    The correction ``E`` solves ``E - (WA)^H E (WA) = -R(Y)`` with
    ``W = (I + G Y)^{-1}`` and ``R`` the DARE residual; only residual-reducing
    steps are kept.
    """
    A, Q = problem.A, problem.Q
    Y = _cast(problem, np.asarray(Y0))

    def defect(Ym):
        W = _dare_w(problem, Ym)
        return Ym - A.conj().T @ Ym @ W @ A - Q, W

    R, W = defect(Y)
    res = float(np.linalg.norm(R))
    it = 0
    for it in range(1, maxiter + 1):
        K = W @ A
        if np.abs(np.linalg.eigvals(K)).max() >= 1:
            raise NoStabilizingSolutionError("Newton iterate lost closed-loop stability")
        E = solve_discrete_lyapunov(K, -_cast(problem, R)).solution
        Yn = _cast(problem, Y + E)
        try:
            Rn, Wn = defect(Yn)
        except NoStabilizingSolutionError:
            it -= 1
            break
        rn = float(np.linalg.norm(Rn))
        if not rn < res:
            it -= 1
            break
        Y, R, W, res = Yn, Rn, Wn, rn
        if res == 0.0:
            break
    K = W @ A
    margin = 1.0 - float(np.abs(np.linalg.eigvals(K)).max())
    return RiccatiSolution(Y, res, K, margin, it)


def solve_dare(problem, refine=True, maxiter=100, tol=1e-15):
    """Stabilizing Hermitian p.s.d. solution of the DARE.

    Uses the structure-preserving doubling algorithm, falling back to the
    plain fixed-point iteration when doubling breaks down and ``A`` is
    d-stable, then Newton polish.

    Raises
    ------
    NoStabilizingSolutionError
        The iteration fails, ``I + G Y`` is singular, or the closed loop
        ``(I + G Y)^{-1} A`` is not d-stable.
    """
    if problem.kind != "dare":
        raise ValueError("solve_dare needs a DARE problem")
    try:
        Y, its = _sda(problem, maxiter, tol)
    except ConvergenceError as exc:
        if np.abs(np.linalg.eigvals(problem.A)).max(initial=0.0) < 1:
            log.debug("doubling failed (%s); using fixed-point iteration", exc)
            try:
                Y, its = _fixed_point(problem, 100 * maxiter, tol)
            except ConvergenceError as exc2:
                raise NoStabilizingSolutionError(str(exc2)) from exc2
        else:
            raise NoStabilizingSolutionError(str(exc)) from exc
    Y = _cast(problem, Y)
    if np.abs(np.linalg.eigvals(dare_closed_loop(problem, Y))).max(initial=0.0) >= 1:
        raise NoStabilizingSolutionError("closed loop (I + G Y)^{-1} A is not d-stable")
    if refine:
        sol = newton_refine_dare(problem, Y)
    else:
        K = dare_closed_loop(problem, Y)
        sol = RiccatiSolution(Y, dare_residual(problem, Y), K,
                              1.0 - float(np.abs(np.linalg.eigvals(K)).max()))
    Yp = _enforce_psd(sol.solution)
    if Yp is not sol.solution:
        K = dare_closed_loop(problem, Yp)
        sol = RiccatiSolution(Yp, dare_residual(problem, Yp), K,
                              1.0 - float(np.abs(np.linalg.eigvals(K)).max()), sol.iterations)
    if sol.stability_margin <= 0:
        raise NoStabilizingSolutionError("closed loop (I + G Y)^{-1} A is not d-stable")
    return RiccatiSolution(sol.solution, sol.residual, sol.closed_loop,
                           sol.stability_margin, its + sol.iterations)


def solve(problem):
    """Dispatch on ``problem.kind``."""
    return solve_care(problem) if problem.kind == "care" else solve_dare(problem)
