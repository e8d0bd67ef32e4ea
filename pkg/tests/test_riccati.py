import numpy as np
import pytest
from hypothesis import given, strategies as st

from riccond.exceptions import DimensionError, NoStabilizingSolutionError, StructureError
from riccond.harness import random_care_problem, random_dare_problem
from riccond.riccati import (RiccatiProblem, care_residual, dare_residual, solve,
                             solve_care, solve_dare)


def relerr(X, Xref):
    return np.linalg.norm(X - Xref) / np.linalg.norm(Xref)


def test_care_closed_form(example1):
    problem, X = example1
    sol = solve_care(problem)
    assert relerr(sol.solution, X) <= 1e-10
    assert sol.stability_margin > 0
    assert np.array_equal(sol.solution, sol.solution.T)


def test_dare_closed_form(example2):
    problem, Y = example2
    sol = solve_dare(problem)
    assert relerr(sol.solution, Y) <= 1e-9
    assert 0 < sol.stability_margin < 1


def test_closed_form_residuals(example1, example2):
    p1, X = example1
    scale = np.linalg.norm(p1.Q) + np.linalg.norm(p1.A) * np.linalg.norm(X) \
        + np.linalg.norm(X) ** 2
    assert care_residual(p1, X) <= 1e-12 * scale
    p2, Y = example2
    assert dare_residual(p2, Y) <= 1e-10 * max(1.0, np.linalg.norm(Y))


@given(st.integers(1, 5), st.booleans(), st.integers(0, 2**32 - 1))
def test_random_care(n, cx, seed):
    problem = random_care_problem(n, seed, cx)
    sol = solve_care(problem)
    X = sol.solution
    scale = 1 + np.linalg.norm(problem.A) * np.linalg.norm(X) + np.linalg.norm(X) ** 2 \
        * np.linalg.norm(problem.G) + np.linalg.norm(problem.Q)
    assert sol.residual <= 1e-12 * scale
    assert np.linalg.eigvals(problem.A - problem.G @ X).real.max() < 0
    assert np.linalg.eigvalsh(X).min() >= -1e-10 * np.linalg.norm(X, 2)
    assert np.iscomplexobj(X) == cx


@given(st.integers(1, 5), st.booleans(), st.integers(0, 2**32 - 1))
def test_random_dare(n, cx, seed):
    problem = random_dare_problem(n, seed, cx)
    sol = solve_dare(problem)
    Y = sol.solution
    assert sol.residual <= 1e-12 * (1 + np.linalg.norm(Y)) * (1 + np.linalg.norm(problem.A)) ** 2
    W = np.linalg.inv(np.eye(n) + problem.G @ Y)
    assert np.abs(np.linalg.eigvals(W @ problem.A)).max() < 1
    assert np.linalg.eigvalsh(Y).min() >= -1e-10 * np.linalg.norm(Y, 2)


def test_dispatch(example1):
    problem, X = example1
    assert relerr(solve(problem).solution, X) <= 1e-10


def test_from_factors():
    p = RiccatiProblem.from_factors("care", [[0.0, 1.0], [0.0, 0.0]], [[0.0], [1.0]], 1.0,
                                    Q=np.eye(2))
    assert np.array_equal(p.G, np.diag([0.0, 1.0]))
    p = RiccatiProblem.from_factors("dare", np.eye(2) * 0.5, np.eye(2), np.eye(2),
                                    C=[[1.0, 1.0]])
    assert np.array_equal(p.Q, np.ones((2, 2)))
    with pytest.raises(ValueError):
        RiccatiProblem.from_factors("care", np.eye(2), np.eye(2), np.eye(2))


def test_problem_validation():
    with pytest.raises(StructureError):
        RiccatiProblem("care", np.eye(2), np.array([[0.0, 1.0], [0.0, 0.0]]), np.eye(2))
    with pytest.raises(StructureError):
        RiccatiProblem("care", np.eye(2), -np.eye(2), np.eye(2))
    with pytest.raises(DimensionError):
        RiccatiProblem("care", np.eye(2), np.eye(3), np.eye(2))
    with pytest.raises(ValueError):
        RiccatiProblem("lyap", np.eye(2), np.eye(2), np.eye(2))
    with pytest.raises(StructureError):
        RiccatiProblem("care", 1j * np.eye(2), np.eye(2), np.eye(2), field="real")
    p = RiccatiProblem("care", np.eye(2), -np.eye(2) * 1e-3, np.eye(2), check_psd=False)
    assert p.is_real and p.n == 2


def test_problem_arrays_are_frozen():
    p = RiccatiProblem("care", np.eye(2), np.eye(2), np.eye(2))
    with pytest.raises(ValueError):
        p.A[0, 0] = 3.0


def test_complex_field_inferred():
    p = RiccatiProblem("care", np.eye(2) * (1 + 1j), np.eye(2), np.eye(2))
    assert p.field == "complex" and not p.is_real
    p = RiccatiProblem("care", np.eye(2) + 0j, np.eye(2), np.eye(2))
    assert p.field == "real"


def test_care_without_stabilizing_solution():
    # uncontrollable, unstable mode: A = I, G = 0
    p = RiccatiProblem("care", np.eye(2), np.zeros((2, 2)), np.eye(2))
    with pytest.raises(NoStabilizingSolutionError):
        solve_care(p)
    # Hamiltonian eigenvalues on the imaginary axis: A = 0, G = 0
    p = RiccatiProblem("care", np.zeros((2, 2)), np.zeros((2, 2)), np.eye(2))
    with pytest.raises(NoStabilizingSolutionError):
        solve_care(p)


def test_dare_without_stabilizing_solution():
    p = RiccatiProblem("dare", np.diag([2.0, 0.5]), np.zeros((2, 2)), np.eye(2))
    with pytest.raises(NoStabilizingSolutionError):
        solve_dare(p)


def test_kind_mismatch():
    p = RiccatiProblem("care", -np.eye(2), np.eye(2), np.eye(2))
    with pytest.raises(ValueError):
        solve_dare(p)


def test_zero_solution():
    p = RiccatiProblem("care", -np.eye(2), np.zeros((2, 2)), np.zeros((2, 2)))
    assert np.array_equal(solve_care(p).solution, np.zeros((2, 2)))
    p = RiccatiProblem("dare", 0.5 * np.eye(2), np.zeros((2, 2)), np.zeros((2, 2)))
    assert np.allclose(solve_dare(p).solution, 0.0, atol=0)


def test_perturbed_problem():
    p = RiccatiProblem("care", np.eye(2), np.eye(2), np.eye(2))
    q = p.perturbed(np.zeros((2, 2)), -0.5 * np.eye(2) * 3, np.zeros((2, 2)))
    assert np.array_equal(q.G, -0.5 * np.eye(2))
    assert q.perturbed(1j * np.eye(2), np.zeros((2, 2)), np.zeros((2, 2))).field == "complex"
