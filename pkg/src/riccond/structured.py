"""Vectorization, symmetric/skew packings and the structure matrices.

Conventions
-----------
``vec`` stacks columns (Fortran order), so that
``vec(U @ V @ W) == kron(W.T, U) @ vec(V)``.

``sym_pack`` reads the upper triangle row by row,
``[a11, ..., a1n, a22, ..., a2n, ..., ann]``, and ``skew_pack`` reads the
strict upper triangle in the same order.  The expansion matrices satisfy
``vec(J) == sym_expansion(n) @ sym_pack(J)`` for symmetric ``J`` and
``vec(K) == skew_expansion(n) @ skew_pack(K)`` for skew-symmetric ``K``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import DimensionError, StructureError

__all__ = [
    "vec", "unvec", "kron",
    "sym_pack", "sym_unpack", "skew_pack", "skew_unpack",
    "sym_expansion", "skew_expansion", "vec_transpose_permutation",
    "sym_size", "skew_size", "structured_size",
    "StructuredDelta", "pack_real", "unpack_real",
]

SYMMETRY_RTOL = 1e-12


def vec(M):
    """Column-stacked vector of ``M``."""
    M = np.asarray(M)
    if M.ndim != 2:
        raise DimensionError(f"vec expects a 2-D array, got shape {M.shape}")
    return M.reshape(-1, order="F")


def unvec(v, rows, cols):
    """Inverse of :func:`vec`; entry ``(i, j)`` is ``v[i + j*rows]``."""
    v = np.asarray(v)
    if v.ndim != 1 or v.size != rows * cols:
        raise DimensionError(
            f"cannot reshape vector of length {v.size} into {rows}x{cols}")
    return v.reshape((rows, cols), order="F")


def kron(A, B):
    """Kronecker product ``[a_ij * B]``."""
    return np.kron(np.asarray(A), np.asarray(B))


def sym_size(n):
    return n * (n + 1) // 2


def skew_size(n):
    return n * (n - 1) // 2


def structured_size(n, structure="complex"):
    """Length of the structured data vector: 4n^2 (complex) or n^2+n(n+1) (real)."""
    if structure == "complex":
        return 4 * n * n
    if structure == "real":
        return n * n + n * (n + 1)
    raise ValueError(f"unknown structure {structure!r}")


def _square(M, name):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {M.shape}")
    return M


def _check_symmetry(M, sign, what):
    scale = max(1.0, float(np.max(np.abs(M), initial=0.0)))
    defect = float(np.max(np.abs(M - sign * M.T), initial=0.0))
    if defect > SYMMETRY_RTOL * scale:
        raise StructureError(f"matrix is not {what} (defect {defect:.3e})")


def sym_pack(J):
    """Pack a real symmetric matrix into its upper triangle, row by row."""
    J = _square(J, "J")
    _check_symmetry(J, 1, "symmetric")
    return J[np.triu_indices(J.shape[0])].copy()


def sym_unpack(s, n):
    s = np.asarray(s)
    if s.shape != (sym_size(n),):
        raise DimensionError(f"expected {sym_size(n)} packed entries, got {s.shape}")
    J = np.zeros((n, n), dtype=s.dtype)
    iu = np.triu_indices(n)
    J[iu] = s
    J.T[iu] = s
    return J


def skew_pack(K):
    """Pack a real skew-symmetric matrix into its strict upper triangle."""
    K = _square(K, "K")
    _check_symmetry(K, -1, "skew-symmetric")
    return K[np.triu_indices(K.shape[0], 1)].copy()


def skew_unpack(s, n):
    s = np.asarray(s)
    if s.shape != (skew_size(n),):
        raise DimensionError(f"expected {skew_size(n)} packed entries, got {s.shape}")
    K = np.zeros((n, n), dtype=s.dtype)
    iu = np.triu_indices(n, 1)
    K[iu] = s
    K.T[iu] = -s
    return K


@lru_cache(maxsize=64)
def _sym_expansion(n):
    S = np.zeros((n * n, sym_size(n)))
    for k, (i, j) in enumerate(zip(*np.triu_indices(n))):
        S[i + j * n, k] = 1.0
        S[j + i * n, k] = 1.0
    S.flags.writeable = False
    return S


@lru_cache(maxsize=64)
def _skew_expansion(n):
    S = np.zeros((n * n, skew_size(n)))
    for k, (i, j) in enumerate(zip(*np.triu_indices(n, 1))):
        S[i + j * n, k] = 1.0
        S[j + i * n, k] = -1.0
    S.flags.writeable = False
    return S


@lru_cache(maxsize=64)
def _vec_transpose_permutation(n):
    P = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            P[j + i * n, i + j * n] = 1.0
    P.flags.writeable = False
    return P


def sym_expansion(n):
    """The n^2 x n(n+1)/2 matrix S1 with ``vec(J) = S1 @ sym_pack(J)``."""
    if n < 1:
        raise DimensionError("n must be positive")
    return _sym_expansion(n)


def skew_expansion(n):
    """The n^2 x n(n-1)/2 matrix S2 with ``vec(K) = S2 @ skew_pack(K)``."""
    if n < 1:
        raise DimensionError("n must be positive")
    return _skew_expansion(n)


def vec_transpose_permutation(n):
    """Permutation ``Pi`` with ``Pi @ vec(A) == vec(A.T)`` for n x n ``A``."""
    if n < 1:
        raise DimensionError("n must be positive")
    return _vec_transpose_permutation(n)


@dataclass(frozen=True)
class StructuredDelta:
    """A structured perturbation of ``(A, G, Q)`` with Hermitian ``G``, ``Q``.

    The six segments follow the layout
    ``[vec(Re A), vec(Im A), sym(Re G), skew(Im G), sym(Re Q), skew(Im Q)]``.
    """

    n: int
    a_re: np.ndarray
    a_im: np.ndarray
    g_re: np.ndarray
    g_im: np.ndarray
    q_re: np.ndarray
    q_im: np.ndarray

    SEGMENTS = ("a_re", "a_im", "g_re", "g_im", "q_re", "q_im")

    def __post_init__(self):
        n = self.n
        expected = (n * n, n * n, sym_size(n), skew_size(n), sym_size(n), skew_size(n))
        for name, size in zip(self.SEGMENTS, expected):
            seg = np.asarray(getattr(self, name), dtype=float)
            if seg.shape != (size,):
                raise DimensionError(f"segment {name} must have length {size}, got {seg.shape}")
            object.__setattr__(self, name, seg)

    @staticmethod
    def segment_sizes(n):
        return (n * n, n * n, sym_size(n), skew_size(n), sym_size(n), skew_size(n))

    @classmethod
    def from_vector(cls, v, n):
        v = np.asarray(v, dtype=float)
        if v.shape != (4 * n * n,):
            raise DimensionError(f"structured vector must have length {4 * n * n}")
        bounds = np.cumsum((0,) + cls.segment_sizes(n))
        parts = [v[bounds[i]:bounds[i + 1]] for i in range(6)]
        return cls(n, *parts)

    @classmethod
    def from_matrices(cls, dA, dG, dQ):
        dA, dG, dQ = (np.asarray(M) for M in (dA, dG, dQ))
        n = _square(dA, "dA").shape[0]
        return cls(
            n,
            vec(dA.real).astype(float), vec(dA.imag).astype(float),
            sym_pack(dG.real), skew_pack(dG.imag),
            sym_pack(dQ.real), skew_pack(dQ.imag),
        )

    def to_vector(self):
        return np.concatenate([getattr(self, name) for name in self.SEGMENTS])

    def to_matrices(self):
        """Materialize ``(dA, dG, dQ)``; ``dG`` and ``dQ`` are exactly Hermitian."""
        n = self.n
        dA = unvec(self.a_re, n, n) + 1j * unvec(self.a_im, n, n)
        dG = sym_unpack(self.g_re, n) + 1j * skew_unpack(self.g_im, n)
        dQ = sym_unpack(self.q_re, n) + 1j * skew_unpack(self.q_im, n)
        return dA, dG, dQ


def pack_real(A, G, Q):
    """Real structured vector ``[vec(A), sym(G), sym(Q)]``."""
    return np.concatenate([vec(np.asarray(A, dtype=float)),
                           sym_pack(np.asarray(G, dtype=float)),
                           sym_pack(np.asarray(Q, dtype=float))])


def unpack_real(v, n):
    """Inverse of :func:`pack_real`."""
    v = np.asarray(v, dtype=float)
    if v.shape != (structured_size(n, "real"),):
        raise DimensionError(f"real structured vector must have length {structured_size(n, 'real')}")
    s = sym_size(n)
    A = unvec(v[:n * n], n, n)
    G = sym_unpack(v[n * n:n * n + s], n)
    Q = sym_unpack(v[n * n + s:], n)
    return A, G, Q
