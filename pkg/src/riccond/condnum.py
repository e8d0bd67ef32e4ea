"""Structured normwise, mixed and componentwise condition numbers.

The solution map sends the structured data vector

    [vec(Re A), vec(Im A), sym(Re G), skew(Im G), sym(Re Q), skew(Im Q)]

(or ``[vec(A), sym(G), sym(Q)]`` for real data) to ``vec(X)``.  Its
derivative is ``-Z^{-1} M`` for the CARE and ``T^{-1} N`` for the DARE,
where ``Z``/``T`` are the Kronecker matrices of the closed-loop Lyapunov and
Stein operators and ``M``/``N`` collect one block per data segment.  All
quantities here are dense and meant for modest ``n`` (``n^2 x 4n^2``
matrices are formed explicitly).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .exceptions import SingularOperatorError, StructureError
from .lyapunov import continuous_lyapunov_operator, discrete_lyapunov_operator
from .structured import (StructuredDelta, kron, pack_real, skew_expansion, sym_expansion,
                         unvec, vec, vec_transpose_permutation)

__all__ = [
    "DeltaParameters", "JacobianAssembly", "ConditionReport", "MixedCondition",
    "default_deltas", "zhou_deltas",
    "assemble_care_jacobian", "assemble_dare_jacobian", "assemble_jacobian",
    "care_kappa1_complex", "care_kappaU_complex", "care_kappaU_real",
    "care_kappa1U_unstructured_real", "care_mixed_comp_complex", "care_mixed_comp_real",
    "dare_kappa1_complex", "dare_kappaU_complex", "dare_kappaU_real",
    "dare_kappa1U_unstructured_real", "dare_mixed_comp_complex", "dare_mixed_comp_real",
    "condition_report", "condition_matrix", "structured_data_vector",
    "directional_derivative", "zero_safe_divide",
]

COMPLEX_BLOCKS = ("a_re", "a_im", "g_re", "g_im", "q_re", "q_im")
REAL_BLOCKS = ("a", "g", "q")


def zero_safe_divide(num, den):
    """Entrywise ``num / den`` with 0 wherever ``den == 0``."""
    num = np.asarray(num)
    den = np.asarray(den)
    out = np.zeros(np.broadcast(num, den).shape, dtype=np.result_type(num, den, float))
    mask = den != 0
    np.divide(num, den, out=out, where=mask)
    return out


@dataclass(frozen=True)
class DeltaParameters:
    """Per-block scalings of the normwise perturbation measure.

    ``values`` is ordered by data block: six entries
    ``(Re A, Im A, Re G, Im G, Re Q, Im Q)`` for the complex structure, three
    ``(A, G, Q)`` for the real one.  A zero entry switches that perturbation
    direction off.
    """

    values: tuple
    convention: str = "structured"

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) not in (3, 6):
            raise ValueError("DeltaParameters needs 3 (real) or 6 (complex) values")
        if any(v < 0 or not np.isfinite(v) for v in vals):
            raise ValueError("delta parameters must be finite and nonnegative")
        object.__setattr__(self, "values", vals)

    @property
    def structure(self):
        return "complex" if len(self.values) == 6 else "real"

    def as_real(self):
        """Drop the imaginary-part entries of a complex parameter set."""
        if self.structure == "real":
            return self
        v = self.values
        return DeltaParameters((v[0], v[2], v[4]), self.convention)


def default_deltas(problem, structure="complex"):
    """Scalings ``||Re A||_F, ||Im A||_F, ||sym(Re G)||_2, ||skew(Im G)||_2, ...``.

    The ``sym``/``skew`` norms are vector 2-norms of the packed triangles.
    The real structure uses ``(||A||_F, ||sym G||_2, ||sym Q||_2)``.
    """
    d = StructuredDelta.from_matrices(problem.A, problem.G, problem.Q)
    vals = tuple(float(np.linalg.norm(getattr(d, s))) for s in StructuredDelta.SEGMENTS)
    if structure == "real":
        return DeltaParameters((vals[0], vals[2], vals[4]))
    return DeltaParameters(vals)


def zhou_deltas(problem, structure="real"):
    """Unstructured scalings ``(||A||_F, ||G||_F, ||Q||_F)`` in block order.

    For the complex structure the Frobenius norms of the real and imaginary
    parts are used instead.
    """
    A, G, Q = problem.A, problem.G, problem.Q
    if structure == "real":
        return DeltaParameters(tuple(float(np.linalg.norm(M)) for M in (A, G, Q)), "zhou")
    vals = []
    for M in (A, G, Q):
        vals += [float(np.linalg.norm(M.real)), float(np.linalg.norm(np.imag(M)))]
    return DeltaParameters(tuple(vals), "zhou")


def structured_data_vector(problem, structure="complex"):
    """The data vector itself, in the block layout of ``structure``."""
    if structure == "real":
        return pack_real(problem.A.real, problem.G.real, problem.Q.real)
    return StructuredDelta.from_matrices(problem.A, problem.G, problem.Q).to_vector()


def _segments(problem, structure):
    """Packed data segments, one per block."""
    if structure == "real":
        n = problem.n
        v = structured_data_vector(problem, "real")
        s = n * (n + 1) // 2
        return [v[:n * n], v[n * n:n * n + s], v[n * n + s:]]
    d = StructuredDelta.from_matrices(problem.A, problem.G, problem.Q)
    return [getattr(d, s) for s in StructuredDelta.SEGMENTS]


@dataclass
class JacobianAssembly:
    """Kronecker-form derivative of the solution map.

    ``jacobian = sign * operator^{-1} @ M`` with ``M`` the horizontal
    concatenation of ``blocks``; ``sign`` is -1 for the CARE and +1 for the
    DARE.  ``W`` is ``(I + G Y)^{-1}`` for the DARE and ``None`` otherwise.
    """

    kind: str
    structure: str
    solution: np.ndarray
    operator: np.ndarray
    blocks: dict
    sign: float
    unstructured_blocks: dict = field(default_factory=dict)
    W: Optional[np.ndarray] = None

    @property
    def n(self):
        return self.solution.shape[0]

    @property
    def M(self):
        return np.hstack([self.blocks[k] for k in self.block_names])

    @property
    def block_names(self):
        return REAL_BLOCKS if self.structure == "real" else COMPLEX_BLOCKS

    @cached_property
    def _lu(self):
        op = self.operator
        s = np.linalg.svd(op, compute_uv=False)
        if s[-1] <= 1e-13 * s[0]:
            raise SingularOperatorError(f"{'Z' if self.kind == 'care' else 'T'} is singular")
        return lu_factor(op)

    def solve(self, rhs):
        """``operator^{-1} @ rhs`` through a single LU factorization."""
        return lu_solve(self._lu, rhs)

    @cached_property
    def solved_blocks(self):
        return {k: self.solve(self.blocks[k]) for k in self.block_names}

    @cached_property
    def jacobian(self):
        return self.sign * np.hstack([self.solved_blocks[k] for k in self.block_names])

    @cached_property
    def operator_inverse(self):
        return self.solve(np.eye(self.operator.shape[0]))


def _check_structure(problem, structure):
    if structure not in ("real", "complex"):
        raise ValueError(f"structure must be 'real' or 'complex', got {structure!r}")
    if structure == "real" and not problem.is_real:
        raise StructureError("the real structure needs real data")


def assemble_care_jacobian(problem, X, structure="complex"):
    """Blocks of ``-Z^{-1} M`` at the CARE solution ``X``.

    ``Z = I (x) (A - G X)^H + (A - G X)^T (x) I`` and, in the complex layout,
    ``M = [(I(x)X) + (X^T(x)I)Pi, i((I(x)X) - (X^T(x)I)Pi),
    -(X^T(x)X)S1, -i(X^T(x)X)S2, S1, iS2]``.
    """
    _check_structure(problem, structure)
    A, G = problem.A, problem.G
    X = np.asarray(X)
    n = problem.n
    F = A - G @ X
    if np.linalg.eigvals(F).real.max(initial=-np.inf) >= 0:
        raise SingularOperatorError("closed loop A - G X is not c-stable")
    eye = np.eye(n)
    Pi = vec_transpose_permutation(n)
    S1, S2 = sym_expansion(n), skew_expansion(n)
    IX = kron(eye, X)
    XIP = kron(X.T, eye) @ Pi
    XX = kron(X.T, X)
    if structure == "real":
        Z = kron(eye, F.T) + kron(F.T, eye)
        blocks = {"a": IX + XIP, "g": -XX @ S1, "q": S1.astype(float)}
        unstructured = {"a": IX + XIP, "g": -XX, "q": np.eye(n * n)}
    else:
        Z = continuous_lyapunov_operator(F)
        blocks = {
            "a_re": IX + XIP, "a_im": 1j * (IX - XIP),
            "g_re": -XX @ S1, "g_im": -1j * (XX @ S2),
            "q_re": S1.astype(complex), "q_im": 1j * S2,
        }
        unstructured = {}
    return JacobianAssembly("care", structure, X, Z, blocks, -1.0, unstructured)


def assemble_dare_jacobian(problem, Y, structure="complex"):
    """Blocks of ``T^{-1} N`` at the DARE solution ``Y``.

    With ``W = (I + G Y)^{-1}``, ``L = A^H Y W`` and ``R = A^T W^T Y^T``:
    ``T = I - (A^T W^T) (x) (A^H W^H)`` and
    ``N = [(I(x)L) + (R(x)I)Pi, i((I(x)L) - (R(x)I)Pi), -(R(x)L)S1,
    -i(R(x)L)S2, S1, iS2]``.
    """
    _check_structure(problem, structure)
    A, G = problem.A, problem.G
    Y = np.asarray(Y)
    n = problem.n
    eye = np.eye(n)
    M = eye + G @ Y
    if np.linalg.cond(M) > 1 / np.finfo(float).eps:
        raise SingularOperatorError("I + G Y is singular")
    W = np.linalg.inv(M)
    K = W @ A
    if np.abs(np.linalg.eigvals(K)).max(initial=0.0) >= 1:
        raise SingularOperatorError("closed loop (I + G Y)^{-1} A is not d-stable")
    Pi = vec_transpose_permutation(n)
    S1, S2 = sym_expansion(n), skew_expansion(n)
    L = A.conj().T @ Y @ W
    R = A.T @ W.T @ Y.T
    IL = kron(eye, L)
    RIP = kron(R, eye) @ Pi
    RL = kron(R, L)
    if structure == "real":
        T = np.eye(n * n) - kron(A.T @ W.T, A.T @ W.T)
        blocks = {"a": IL + RIP, "g": -RL @ S1, "q": S1.astype(float)}
        unstructured = {"a": IL + RIP, "g": -RL, "q": np.eye(n * n)}
    else:
        T = discrete_lyapunov_operator(K)
        blocks = {
            "a_re": IL + RIP, "a_im": 1j * (IL - RIP),
            "g_re": -RL @ S1, "g_im": -1j * (RL @ S2),
            "q_re": S1.astype(complex), "q_im": 1j * S2,
        }
        unstructured = {}
    return JacobianAssembly("dare", structure, Y, T, blocks, 1.0, unstructured, W)


def assemble_jacobian(problem, X, structure="complex"):
    if problem.kind == "care":
        return assemble_care_jacobian(problem, X, structure)
    return assemble_dare_jacobian(problem, X, structure)


def directional_derivative(problem, X, dA, dG, dQ, structure=None):
    """First-order change of the solution along ``(dA, dG, dQ)``."""
    structure = structure or ("real" if problem.is_real and not any(
        np.iscomplexobj(M) and np.any(np.imag(M) != 0) for M in (dA, dG, dQ)) else "complex")
    asm = assemble_jacobian(problem, X, structure)
    if structure == "real":
        d = pack_real(np.real(dA), np.real(dG), np.real(dQ))
    else:
        d = StructuredDelta.from_matrices(dA, dG, dQ).to_vector()
    n = problem.n
    out = unvec(asm.jacobian @ d, n, n)
    return out.real if structure == "real" else out


# -- normwise ---------------------------------------------------------------

def _resolve_deltas(problem, deltas, structure):
    if deltas is None:
        return default_deltas(problem, structure)
    if not isinstance(deltas, DeltaParameters):
        deltas = DeltaParameters(tuple(deltas))
    if structure == "real" and deltas.structure == "complex":
        deltas = deltas.as_real()
    if deltas.structure != structure:
        raise ValueError(f"{structure} structure needs {3 if structure == 'real' else 6} deltas")
    return deltas


def _scaled_norm(asm, deltas, blocks=None):
    blocks = blocks or asm.solved_blocks
    cols = [d * blocks[k] for k, d in zip(asm.block_names, deltas.values)]
    return float(np.linalg.norm(np.hstack(cols), 2))


def _sum_of_block_norms(asm, deltas, blocks):
    return float(sum(d * np.linalg.norm(blocks[k], 2)
                     for k, d in zip(asm.block_names, deltas.values)))


def _fro(X):
    return float(np.linalg.norm(X))


def _kappa1(asm, deltas):
    nx = _fro(asm.solution)
    if nx == 0:
        return 0.0
    return _scaled_norm(asm, deltas) / nx


def _kappaU_complex(asm, deltas):
    nx = _fro(asm.solution)
    if nx == 0:
        return 0.0
    k1 = _scaled_norm(asm, deltas) / nx
    alpha = _sum_of_block_norms(asm, deltas, asm.solved_blocks)
    return min(np.sqrt(6.0) * k1, alpha / nx)


def _kappaU_real(asm, deltas):
    nx = _fro(asm.solution)
    if nx == 0:
        return 0.0
    first = np.sqrt(3.0) * _scaled_norm(asm, deltas) / nx
    beta = _sum_of_block_norms(asm, deltas, asm.solved_blocks)
    return min(first, beta / nx)


def _kappa1U_unstructured(asm, deltas):
    nx = _fro(asm.solution)
    if nx == 0:
        return 0.0
    solved = {k: asm.solve(B) for k, B in asm.unstructured_blocks.items()}
    first = np.sqrt(3.0) * _scaled_norm(asm, deltas, solved) / nx
    gamma = _sum_of_block_norms(asm, deltas, solved)
    return min(first, gamma / nx)


def care_kappa1_complex(problem, X, deltas=None):
    """``||Z^{-1} M D||_2 / ||X||_F`` (0 for a zero solution)."""
    return _kappa1(assemble_care_jacobian(problem, X), _resolve_deltas(problem, deltas, "complex"))


def care_kappaU_complex(problem, X, deltas=None):
    """``min(sqrt(6) kappa1, alpha_c / ||X||_F)``, a bound for the max-type measure."""
    return _kappaU_complex(assemble_care_jacobian(problem, X),
                           _resolve_deltas(problem, deltas, "complex"))


def care_kappaU_real(problem, X, deltas=None):
    """Structured normwise bound for real data.

    ``min(sqrt(3) ||Z1^{-1} M1 D1||_2, beta) / ||X||_F`` where ``beta`` sums
    the scaled spectral norms of the three solved blocks.
    """
    return _kappaU_real(assemble_care_jacobian(problem, X, "real"),
                        _resolve_deltas(problem, deltas, "real"))


def care_kappa1U_unstructured_real(problem, X, deltas=None):
    """Unstructured bound with general (non-symmetric) ``dG``, ``dQ``.

    ``deltas`` defaults to ``(||A||_F, ||G||_F, ||Q||_F)`` applied to the
    ``A``, ``G`` and ``Q`` blocks respectively.
    """
    asm = assemble_care_jacobian(problem, X, "real")
    deltas = zhou_deltas(problem) if deltas is None else _resolve_deltas(problem, deltas, "real")
    return _kappa1U_unstructured(asm, deltas)


def dare_kappa1_complex(problem, Y, deltas=None):
    """``||T^{-1} N D||_2 / ||Y||_F`` (0 for a zero solution)."""
    return _kappa1(assemble_dare_jacobian(problem, Y), _resolve_deltas(problem, deltas, "complex"))


def dare_kappaU_complex(problem, Y, deltas=None):
    return _kappaU_complex(assemble_dare_jacobian(problem, Y),
                           _resolve_deltas(problem, deltas, "complex"))


def dare_kappaU_real(problem, Y, deltas=None):
    return _kappaU_real(assemble_dare_jacobian(problem, Y, "real"),
                        _resolve_deltas(problem, deltas, "real"))


def dare_kappa1U_unstructured_real(problem, Y, deltas=None):
    asm = assemble_dare_jacobian(problem, Y, "real")
    deltas = zhou_deltas(problem) if deltas is None else _resolve_deltas(problem, deltas, "real")
    return _kappa1U_unstructured(asm, deltas)


# -- mixed and componentwise ------------------------------------------------

class MixedCondition(NamedTuple):
    m: float
    c: float
    mU: float
    cU: float


def _first_order_envelope(asm, problem):
    """``sum_b |op^{-1} block_b| @ |data_b|`` -- the worst-case |vec(dX)| per unit eps."""
    segs = _segments(problem, asm.structure)
    v = np.zeros(asm.n ** 2)
    for k, seg in zip(asm.block_names, segs):
        v += np.abs(asm.solved_blocks[k]) @ np.abs(seg)
    return v


def _care_bound_matrix(problem, X):
    A, G, Q = problem.A, problem.G, problem.Q
    aX = np.abs(X)
    out = np.abs(Q.real) + np.abs(np.imag(Q))
    for part in (np.abs(A.real), np.abs(np.imag(A))):
        out = out + aX @ part + part.T @ aX
    for part in (np.abs(G.real), np.abs(np.imag(G))):
        out = out + aX @ part @ aX
    return out


def _dare_bound_matrix(problem, Y, W):
    A, G, Q = problem.A, problem.G, problem.Q
    left = np.abs(A.conj().T) @ np.abs(Y) @ np.abs(W)
    right = np.abs(Y) @ np.abs(W) @ np.abs(A)
    out = np.abs(Q.real) + np.abs(np.imag(Q))
    for part in (np.abs(A.real), np.abs(np.imag(A))):
        out = out + left @ part + part.T @ right
    for part in (np.abs(G.real), np.abs(np.imag(G))):
        out = out + left @ part @ right
    return out


def _mixed_comp(asm, problem):
    X = asm.solution
    xv = vec(X)
    xmax = float(np.max(np.abs(xv), initial=0.0))
    if xmax == 0:
        return MixedCondition(0.0, 0.0, 0.0, 0.0)
    env = _first_order_envelope(asm, problem)
    m = float(env.max()) / xmax
    c = float(np.max(zero_safe_divide(env, np.abs(xv))))
    if asm.kind == "care":
        bound = _care_bound_matrix(problem, X)
    else:
        bound = _dare_bound_matrix(problem, X, asm.W)
    bmax = float(bound.max())
    inv = asm.operator_inverse
    inv_inf = float(np.abs(inv).sum(axis=1).max())
    scaled_inf = float(zero_safe_divide(np.abs(inv).sum(axis=1), np.abs(xv)).max())
    return MixedCondition(m, c, inv_inf * bmax / xmax, scaled_inf * bmax)


def care_mixed_comp_complex(problem, X):
    """Exact mixed ``m``/componentwise ``c`` numbers and their simpler bounds."""
    return _mixed_comp(assemble_care_jacobian(problem, X), problem)


def care_mixed_comp_real(problem, X):
    return _mixed_comp(assemble_care_jacobian(problem, X, "real"), problem)


def dare_mixed_comp_complex(problem, Y):
    return _mixed_comp(assemble_dare_jacobian(problem, Y), problem)


def dare_mixed_comp_real(problem, Y):
    return _mixed_comp(assemble_dare_jacobian(problem, Y, "real"), problem)


# -- reports and per-entry condition ----------------------------------------

@dataclass(frozen=True)
class ConditionReport:
    """All scalar condition numbers of one solved problem.

    ``kappa1`` and ``kappaU`` come from the complex structure (they are also
    valid for real data, whose imaginary directions get zero weight).
    ``kappaU_real`` and ``unstructured_kappa1U`` are only defined for real
    problems.  ``degenerate`` flags a zero solution, for which every
    relative number is reported as 0.
    """

    kind: str
    kappa1: float
    kappaU: float
    mixed_m: float
    comp_c: float
    mixed_mU: float
    comp_cU: float
    kappaU_real: Optional[float]
    unstructured_kappa1U: Optional[float]
    deltas: DeltaParameters
    zhou: Optional[DeltaParameters]
    operator_condition: float
    degenerate: bool

    def as_dict(self):
        return {
            "kind": self.kind,
            "kappa1": self.kappa1, "kappaU": self.kappaU,
            "kappaU_real": self.kappaU_real,
            "unstructured_kappa1U": self.unstructured_kappa1U,
            "mixed_m": self.mixed_m, "comp_c": self.comp_c,
            "mixed_mU": self.mixed_mU, "comp_cU": self.comp_cU,
            "deltas": list(self.deltas.values),
            "delta_convention": self.deltas.convention,
            "zhou_deltas": None if self.zhou is None else list(self.zhou.values),
            "operator_condition": self.operator_condition,
            "degenerate": self.degenerate,
        }


def condition_report(problem, X, deltas=None, zhou=None):
    """Evaluate every condition number at the solution ``X``.

    ``deltas`` may hold six (complex) or three (real) values; three values
    are used for the real-data bound, and zero-padded imaginary entries for
    the complex quantities.
    """
    if deltas is not None and not isinstance(deltas, DeltaParameters):
        deltas = DeltaParameters(tuple(deltas), "explicit")
    if deltas is None:
        cdeltas = default_deltas(problem, "complex")
    elif deltas.structure == "real":
        a, g, q = deltas.values
        cdeltas = DeltaParameters((a, 0.0, g, 0.0, q, 0.0), deltas.convention)
    else:
        cdeltas = deltas
    asm = assemble_jacobian(problem, X, "complex")
    k1 = _kappa1(asm, cdeltas)
    kU = _kappaU_complex(asm, cdeltas)
    kU_real = k1U = None
    zd = None
    if problem.is_real:
        rasm = assemble_jacobian(problem, np.real(X), "real")
        kU_real = _kappaU_real(rasm, cdeltas.as_real())
        zd = zhou if zhou is not None else zhou_deltas(problem)
        if not isinstance(zd, DeltaParameters):
            zd = DeltaParameters(tuple(zd), "explicit")
        k1U = _kappa1U_unstructured(rasm, zd)
        mc = _mixed_comp(rasm, problem)
    else:
        mc = _mixed_comp(asm, problem)
    return ConditionReport(
        kind=problem.kind, kappa1=k1, kappaU=kU,
        mixed_m=mc.m, comp_c=mc.c, mixed_mU=mc.mU, comp_cU=mc.cU,
        kappaU_real=kU_real, unstructured_kappa1U=k1U,
        deltas=cdeltas, zhou=zd,
        operator_condition=float(np.linalg.cond(asm.operator)),
        degenerate=bool(_fro(X) == 0),
    )


def condition_matrix(problem, X, mode="normwise", structure=None, relative=True):
    """Exact per-entry condition numbers of the solution.

    Entry ``(i, j)`` is the 2-norm of the row of the structured Jacobian that
    produces ``x_ij``; ``mode='normwise'`` multiplies by ``||[A, G, Q]||_F``
    and ``mode='componentwise'`` first scales every column by the matching
    data entry.  With ``relative=True`` the result is divided entrywise by
    ``|X|``, leaving entries at zero solution entries unchanged.  This is the
    limit of the small-sample estimator when the sample spans the whole
    perturbation space.
    """
    structure = structure or ("real" if problem.is_real else "complex")
    asm = assemble_jacobian(problem, X, structure)
    J = asm.jacobian
    if mode == "normwise":
        scale = np.sqrt(sum(np.linalg.norm(M) ** 2 for M in (problem.A, problem.G, problem.Q)))
        rows = scale * np.linalg.norm(J, axis=1)
    elif mode == "componentwise":
        rows = np.linalg.norm(J * structured_data_vector(problem, structure)[None, :], axis=1)
    else:
        raise ValueError(f"mode must be 'normwise' or 'componentwise', got {mode!r}")
    n = problem.n
    K = unvec(rows, n, n)
    if relative:
        absX = np.abs(np.asarray(X))
        K = np.where(absX != 0, zero_safe_divide(K, absX), K)
    return K

