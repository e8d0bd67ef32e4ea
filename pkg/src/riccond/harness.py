"""Perturbation experiments and the two benchmark problem families.

``example1_problem`` is the 2x2 CARE with ``A = [[0, nu], [0, 0]]``,
``G = diag(0, 1)``, ``Q = I``; ``example2_problem`` is the 3x3 DARE obtained
by a Householder-type similarity ``V = I - 2 v v^T / 3`` of diagonal data.
Both come with their closed-form solutions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .condnum import (care_kappa1U_unstructured_real, care_kappaU_real, care_mixed_comp_complex,
                      care_mixed_comp_real, dare_kappa1U_unstructured_real, dare_kappaU_real,
                      dare_mixed_comp_complex, dare_mixed_comp_real, directional_derivative,
                      zero_safe_divide)
from .exceptions import RiccondError
from .riccati import RiccatiProblem, solve

__all__ = [
    "PerturbationSpec", "ExperimentRow",
    "gen_structured_perturbation", "run_perturbation_experiment",
    "example1_problem", "example2_problem",
    "random_care_problem", "random_dare_problem",
    "reproduce_table1", "reproduce_table2",
    "TABLE1_PARAMETERS", "TABLE2_PARAMETERS",
]

TABLE1_PARAMETERS = (1.0, 1e6, 1e-6)
TABLE2_PARAMETERS = (1, 5, 7)


@dataclass(frozen=True)
class PerturbationSpec:
    """Componentwise-relative perturbation of size ``epsilon``."""

    epsilon: float
    seed: int = 0

    def __post_init__(self):
        if not (self.epsilon >= 0 and np.isfinite(self.epsilon)):
            raise ValueError("epsilon must be finite and nonnegative")


def _uniform_symmetric(rng, n):
    M = rng.uniform(-1.0, 1.0, (n, n))
    return np.triu(M) + np.triu(M, 1).T


def gen_structured_perturbation(problem, spec):
    """Draw ``(dA, dG, dQ) = eps (M1 o A, M2 o G, M3 o Q)``.

    The multipliers are uniform on (-1, 1); ``M2`` and ``M3`` are symmetric.
    For complex data, real and imaginary parts are scaled by independent
    symmetric multipliers; since ``Im G`` is skew, the entrywise products keep
    ``dG`` and ``dQ`` exactly Hermitian.
    """
    rng = np.random.default_rng(spec.seed)
    eps = spec.epsilon
    n = problem.n
    A, G, Q = problem.A, problem.G, problem.Q
    dA = eps * rng.uniform(-1.0, 1.0, (n, n)) * A.real
    dG = eps * _uniform_symmetric(rng, n) * G.real
    dQ = eps * _uniform_symmetric(rng, n) * Q.real
    if not problem.is_real:
        dA = dA + 1j * eps * rng.uniform(-1.0, 1.0, (n, n)) * A.imag
        dG = dG + 1j * eps * (_uniform_symmetric(rng, n) * G.imag)
        dQ = dQ + 1j * eps * (_uniform_symmetric(rng, n) * Q.imag)
    return dA, dG, dQ


@dataclass
class ExperimentRow:
    """Observed relative changes next to their first-order predictions.

    ``kappaU`` is the structured normwise bound and ``kappa1U`` the
    unstructured one (both for real data); for complex problems they are
    ``None``.
    """

    parameter: float
    epsilon: float
    rel_fro: float
    rel_max: float
    rel_comp: float
    kappaU: Optional[float]
    kappa1U: Optional[float]
    m: float
    c: float
    failed: bool = False
    message: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def predicted(self):
        e = self.epsilon
        scale = (lambda v: None if v is None else e * v)
        return {"kappaU": scale(self.kappaU), "kappa1U": scale(self.kappa1U),
                "m": e * self.m, "c": e * self.c}

    @property
    def observed(self):
        return {"fro": self.rel_fro, "max": self.rel_max, "comp": self.rel_comp}


def _condition_numbers(problem, X):
    if problem.kind == "care":
        if problem.is_real:
            return (care_kappaU_real(problem, X), care_kappa1U_unstructured_real(problem, X),
                    care_mixed_comp_real(problem, X))
        return None, None, care_mixed_comp_complex(problem, X)
    if problem.is_real:
        return (dare_kappaU_real(problem, X), dare_kappa1U_unstructured_real(problem, X),
                dare_mixed_comp_real(problem, X))
    return None, None, dare_mixed_comp_complex(problem, X)


def relative_changes(X, dX):
    """``(||dX||_F/||X||_F, ||dX||_max/||X||_max, ||dX o/ X||_max)``; 0/0 counts as 0."""
    X = np.asarray(X)
    dX = np.asarray(dX)
    fro = float(zero_safe_divide(np.linalg.norm(dX), np.linalg.norm(X)))
    mx = float(zero_safe_divide(np.abs(dX).max(), np.abs(X).max()))
    comp = float(zero_safe_divide(np.abs(dX), np.abs(X)).max())
    return fro, mx, comp


def run_perturbation_experiment(problem, spec, X=None, parameter=float("nan")):
    """Re-solve at perturbed data and compare with the condition numbers.

    ``X`` is the unperturbed solution; it is computed when omitted.  A
    failed perturbed solve yields a row with ``failed=True`` and NaN
    observations instead of raising.
    """
    if X is None:
        X = solve(problem).solution
    kU, k1U, mc = _condition_numbers(problem, X)
    dA, dG, dQ = gen_structured_perturbation(problem, spec)
    try:
        Xt = solve(problem.perturbed(dA, dG, dQ)).solution
    except RiccondError as exc:
        nan = float("nan")
        return ExperimentRow(parameter, spec.epsilon, nan, nan, nan, kU, k1U, mc.m, mc.c,
                             failed=True, message=str(exc))
    dX = Xt - X
    fro, mx, comp = relative_changes(X, dX)
    lin = directional_derivative(problem, X, dA, dG, dQ)
    return ExperimentRow(parameter, spec.epsilon, fro, mx, comp, kU, k1U, mc.m, mc.c,
                         extra={"dX": dX, "dX_linear": lin, "delta": (dA, dG, dQ)})


def example1_problem(nu):
    """CARE with ``A = [[0, nu], [0, 0]]``, ``G = diag(0, 1)``, ``Q = I``.

    Returns the problem and ``X = [[sqrt(1 + 2 nu)/nu, 1], [1, sqrt(1 + 2 nu)]]``.
    """
    nu = float(nu)
    if nu <= 0:
        raise ValueError("nu must be positive")
    A = np.array([[0.0, nu], [0.0, 0.0]])
    G = np.diag([0.0, 1.0])
    Q = np.eye(2)
    r = np.sqrt(1.0 + 2.0 * nu)
    X = np.array([[r / nu, 1.0], [1.0, r]])
    return RiccatiProblem("care", A, G, Q), X


def _householder3():
    v = np.ones((3, 1))
    return np.eye(3) - 2.0 * (v @ v.T) / 3.0


def example2_problem(m):
    """3x3 DARE ``A = V diag(0, 10^-m, 1) V``, ``G = 10^-m I``, ``Q = V diag(10^m, 1, 10^-m) V``.

    Returns the problem and ``Y = V diag(y) V`` where ``y_i`` is the positive
    root of the scalar equations ``g y^2 + (1 - a^2 - q g) y - q = 0``.
    """
    V = _householder3()
    s = 10.0 ** (-m)
    q = np.array([10.0 ** m, 1.0, s])
    a = np.array([0.0, s, 1.0])
    g = np.full(3, s)
    A = V @ np.diag(a) @ V
    G = V @ np.diag(g) @ V
    Q = V @ np.diag(q) @ V
    t = a ** 2 + q * g - 1.0
    y = (t + np.sqrt(t ** 2 + 4.0 * q * g)) / (2.0 * g)
    Y = V @ np.diag(y) @ V
    sym = lambda M: (M + M.T) / 2
    return RiccatiProblem("dare", sym(A), sym(G), sym(Q)), sym(Y)


def _random_psd(rng, n, complex_data):
    B = rng.standard_normal((n, n))
    if complex_data:
        B = B + 1j * rng.standard_normal((n, n))
    M = B @ B.conj().T + 0.1 * np.eye(n)
    return (M + M.conj().T) / 2


def random_care_problem(n, seed=None, complex_data=False):
    """Random CARE with positive definite ``G`` and ``Q`` (hence well posed)."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    if complex_data:
        A = A + 1j * rng.standard_normal((n, n))
    return RiccatiProblem("care", A, _random_psd(rng, n, complex_data),
                          _random_psd(rng, n, complex_data))


def random_dare_problem(n, seed=None, complex_data=False):
    """Random DARE with positive definite ``G`` and ``Q``; ``A`` has spectral radius ~1.2."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    if complex_data:
        A = A + 1j * rng.standard_normal((n, n))
    A = 1.2 * A / np.abs(np.linalg.eigvals(A)).max()
    return RiccatiProblem("dare", A, _random_psd(rng, n, complex_data),
                          _random_psd(rng, n, complex_data))


def _reproduce(builder, params, epsilon, seed):
    rows = []
    for i, prm in enumerate(params):
        problem, _ = builder(prm)
        X = solve(problem).solution
        rows.append(run_perturbation_experiment(
            problem, PerturbationSpec(epsilon, seed + i), X=X, parameter=float(prm)))
    return rows


def reproduce_table1(epsilon=1e-8, seed=0, parameters=TABLE1_PARAMETERS):
    """Example 1 rows for ``nu`` in ``parameters``; seeds ``seed, seed+1, ...``."""
    return _reproduce(example1_problem, parameters, epsilon, seed)


def reproduce_table2(epsilon=1e-12, seed=0, parameters=TABLE2_PARAMETERS):
    """Example 2 rows for ``m`` in ``parameters``; seeds ``seed, seed+1, ...``."""
    return _reproduce(example2_problem, parameters, epsilon, seed)
