"""Small-sample statistical condition estimation for CARE and DARE solutions.

Each of ``k`` random orthonormal structured directions costs one Lyapunov
(or Stein) solve with the closed-loop matrix; the per-entry root sum of
squares, rescaled by the Wallis ratio ``omega_k / omega_p``, estimates the
norm of the corresponding row of the solution map's derivative.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import pi, sqrt
from typing import Optional

import numpy as np

from .exceptions import DimensionError
from .lyapunov import solve_continuous_lyapunov, solve_discrete_lyapunov
from .riccati import _dare_w, care_closed_loop
from .structured import (StructuredDelta, structured_size, unpack_real)
from .condnum import structured_data_vector, zero_safe_divide

__all__ = [
    "WALLIS_EXACT_MAX", "wallis_exact", "wallis_approx", "wallis_factor", "wallis_ratio",
    "SceConfig", "ConditionMatrixEstimate", "draw_structured_directions",
    "materialize_direction",
    "sce_care_normwise", "sce_care_componentwise",
    "sce_dare_normwise", "sce_dare_componentwise", "sce",
]

WALLIS_EXACT_MAX = 64


def wallis_exact(p):
    """Product formula for the Wallis factor ``omega_p``."""
    p = int(p)
    if p < 1:
        raise ValueError("p must be a positive integer")
    if p == 1:
        return 1.0
    w = 1.0
    if p % 2:
        # (1*3*...*(p-2)) / (2*4*...*(p-1))
        for j in range(1, p - 1, 2):
            w *= j / (j + 1)
        return w
    # (2/pi) (2*4*...*(p-2)) / (1*3*...*(p-1))
    w = 2.0 / pi
    for j in range(2, p - 1, 2):
        w *= j / (j + 1)
    return w


def wallis_approx(p):
    """Asymptotic form ``sqrt(2 / (pi (p - 1/2)))``."""
    if p < 1:
        raise ValueError("p must be positive")
    return sqrt(2.0 / (pi * (p - 0.5)))


def wallis_factor(p, exact=None):
    """``omega_p``: exact for ``p <= 64`` unless ``exact`` says otherwise."""
    if exact is None:
        exact = p <= WALLIS_EXACT_MAX
    return wallis_exact(p) if exact else wallis_approx(p)


def wallis_ratio(k, p):
    """``omega_k / omega_p`` with both factors taken from the same branch."""
    exact = p <= WALLIS_EXACT_MAX
    return wallis_factor(k, exact) / wallis_factor(p, exact)


@dataclass(frozen=True)
class SceConfig:
    """Sample count, seed and structure of an estimation run."""

    k: int = 5
    seed: int = 0
    structure: Optional[str] = None

    def __post_init__(self):
        if int(self.k) < 1:
            raise ValueError("k must be at least 1")
        if self.structure not in (None, "real", "complex"):
            raise ValueError(f"unknown structure {self.structure!r}")

    def resolve(self, problem):
        return self.structure or ("real" if problem.is_real else "complex")


@dataclass(frozen=True)
class ConditionMatrixEstimate:
    """Estimated per-entry condition numbers.

    ``kind`` is one of ``'K_rel'``, ``'C_rel'``, ``'K_abs'``, ``'C_abs'``;
    ``absolute`` always holds the matching unnormalized matrix.
    """

    values: np.ndarray
    absolute: np.ndarray
    kind: str
    k: int
    seed: Optional[int]
    wallis_ratio: float
    structure: str


def draw_structured_directions(n, k, structure="complex", seed=0):
    """``k`` orthonormal columns of length ``p`` from a seeded Gaussian draw.

    Returns the ``(p, k)`` matrix ``Q`` of the reduced QR factorization of a
    standard normal ``p x k`` matrix.
    """
    p = structured_size(n, structure)
    if not 1 <= k <= p:
        raise DimensionError(f"k must lie in [1, {p}], got {k}")
    rng = np.random.default_rng(seed)
    Qm, _ = np.linalg.qr(rng.standard_normal((p, k)))
    return Qm


def materialize_direction(f, n, structure="complex"):
    """Turn a packed direction into ``(dA, dG, dQ)`` matrices (Hermitian ``dG``, ``dQ``)."""
    if structure == "real":
        return unpack_real(f, n)
    return StructuredDelta.from_vector(f, n).to_matrices()


def _care_rhs(X, dA, dG, dQ):
    R = X @ dG @ X - dQ - X @ dA - dA.conj().T @ X
    return (R + R.conj().T) / 2


def _dare_rhs(L, Rt, dA, dG, dQ):
    # L = A^H Y W, Rt = Y W A
    R = dQ + L @ dA + dA.conj().T @ Rt - L @ dG @ Rt
    return (R + R.conj().T) / 2


def _directions(problem, config, structure, directions, scale):
    n = problem.n
    if directions is None:
        F = draw_structured_directions(n, int(config.k), structure, config.seed)
    else:
        F = np.asarray(directions, dtype=float)
        if F.ndim == 1:
            F = F[:, None]
        if F.shape[0] != structured_size(n, structure):
            raise DimensionError("direction length does not match the structure")
    if scale is not None:
        F = F * scale[:, None]
    return F


def _run(problem, X, config, mode, directions):
    structure = config.resolve(problem)
    if structure == "real" and not problem.is_real:
        raise ValueError("the real structure needs real data")
    n = problem.n
    X = np.asarray(X)
    data = structured_data_vector(problem, structure) if mode == "componentwise" else None
    F = _directions(problem, config, structure, directions, data)
    k = F.shape[1]
    p = F.shape[0]

    if problem.kind == "care":
        Fcl = care_closed_loop(problem, X)

        def solve_one(dA, dG, dQ):
            return solve_continuous_lyapunov(Fcl, _care_rhs(X, dA, dG, dQ)).solution
    else:
        W = _dare_w(problem, X)
        K = W @ problem.A
        L = problem.A.conj().T @ X @ W
        Rt = X @ W @ problem.A

        def solve_one(dA, dG, dQ):
            return solve_discrete_lyapunov(K, _dare_rhs(L, Rt, dA, dG, dQ)).solution

    acc = np.zeros((n, n))
    for i in range(k):
        D = solve_one(*materialize_direction(F[:, i], n, structure))
        acc += np.abs(D) ** 2
    ratio = wallis_ratio(k, p)
    absolute = ratio * np.sqrt(acc)
    if mode == "normwise":
        absolute = absolute * sqrt(sum(np.linalg.norm(M) ** 2
                                       for M in (problem.A, problem.G, problem.Q)))
    absX = np.abs(X)
    rel = np.where(absX != 0, zero_safe_divide(absolute, absX), absolute)
    kind = "K_rel" if mode == "normwise" else "C_rel"
    seed = config.seed if directions is None else None
    return ConditionMatrixEstimate(rel, absolute, kind, k, seed, ratio, structure)


def sce_care_normwise(problem, X, config=SceConfig(), directions=None):
    """Normwise per-entry estimate ``K_rel`` for the CARE solution ``X``.

    ``directions`` (a ``(p, k)`` array) replaces the random draw; it should
    have orthonormal columns for the Wallis scaling to be meaningful.
    """
    return _run(problem, X, config, "normwise", directions)


def sce_care_componentwise(problem, X, config=SceConfig(), directions=None):
    """Componentwise per-entry estimate ``C_rel``; directions are scaled by the data."""
    return _run(problem, X, config, "componentwise", directions)


def sce_dare_normwise(problem, Y, config=SceConfig(), directions=None):
    return _run(problem, Y, config, "normwise", directions)


def sce_dare_componentwise(problem, Y, config=SceConfig(), directions=None):
    return _run(problem, Y, config, "componentwise", directions)


def sce(problem, X, config=SceConfig(), mode="normwise", directions=None):
    """Dispatch on ``problem.kind`` and ``mode``."""
    if mode not in ("normwise", "componentwise"):
        raise ValueError(f"mode must be 'normwise' or 'componentwise', got {mode!r}")
    if problem.kind not in ("care", "dare"):
        raise ValueError(f"unknown problem kind {problem.kind!r}")
    return _run(problem, X, config, mode, directions)
