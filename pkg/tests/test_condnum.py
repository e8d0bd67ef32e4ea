import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from riccond.condnum import (DeltaParameters, assemble_care_jacobian, assemble_dare_jacobian,
                             care_kappa1_complex, care_kappa1U_unstructured_real,
                             care_kappaU_complex, care_kappaU_real, care_mixed_comp_complex,
                             care_mixed_comp_real, condition_matrix, condition_report,
                             dare_kappa1_complex, dare_kappa1U_unstructured_real,
                             dare_kappaU_complex, dare_kappaU_real, dare_mixed_comp_complex,
                             dare_mixed_comp_real, default_deltas, directional_derivative,
                             zhou_deltas)
from riccond.exceptions import SingularOperatorError
from riccond.harness import (example1_problem, example2_problem, random_care_problem,
                             random_dare_problem)
from riccond.riccati import RiccatiProblem, solve
from riccond.structured import StructuredDelta, skew_pack, sym_pack, unpack_real, vec

SLACK = 1 + 1e-10


def solved(problem):
    return problem, solve(problem).solution


def test_scalar_care_assembly():
    a, g, q = 0.5, 2.0, 3.0
    x = (a + np.sqrt(a * a + g * q)) / g
    p = RiccatiProblem("care", [[a]], [[g]], [[q]])
    asm = assemble_care_jacobian(p, np.array([[x]]))
    assert asm.operator[0, 0] == pytest.approx(2 * (a - g * x))
    M = asm.M
    assert M.shape == (1, 4)
    assert np.allclose(M, [[2 * x, 0, -x * x, 1]])
    assert asm.sign == -1


def test_scalar_dare_assembly():
    a, g, q = 0.8, 0.5, 2.0
    p = RiccatiProblem("dare", [[a]], [[g]], [[q]])
    y = solve(p).solution[0, 0]
    w = 1 / (1 + g * y)
    asm = assemble_dare_jacobian(p, np.array([[y]]))
    assert asm.operator[0, 0] == pytest.approx(1 - (a * w) ** 2)
    assert np.allclose(asm.M, [[2 * a * y * w, 0, -(y * w * a) ** 2, 1]])
    # explicit derivative of y with respect to q from the scalar equation
    eps = 1e-6
    yq = solve(RiccatiProblem("dare", [[a]], [[g]], [[q + eps]])).solution[0, 0]
    assert asm.jacobian[0, 3].real == pytest.approx((yq - y) / eps, rel=1e-5)


def test_operator_matrices_reproduced(rng):
    p, X = solved(random_care_problem(3, 1, True))
    asm = assemble_care_jacobian(p, X)
    F = p.A - p.G @ X
    Z = np.kron(np.eye(3), F.conj().T) + np.kron(F.T, np.eye(3))
    assert np.linalg.norm(asm.operator - Z) <= 1e-13 * np.linalg.norm(Z)
    p, Y = solved(random_dare_problem(3, 2, True))
    asm = assemble_dare_jacobian(p, Y)
    W = np.linalg.inv(np.eye(3) + p.G @ Y)
    T = np.eye(9) - np.kron(p.A.T @ W.T, p.A.conj().T @ W.conj().T)
    assert np.linalg.norm(asm.operator - T) <= 1e-13 * np.linalg.norm(T)


def test_q_block_reconstructs_hermitian_delta(rng):
    p, X = solved(random_care_problem(3, 3, True))
    asm = assemble_care_jacobian(p, X)
    H = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    H = H + H.conj().T
    got = asm.blocks["q_re"] @ sym_pack(H.real) + asm.blocks["q_im"] @ skew_pack(H.imag)
    assert np.allclose(got, vec(H))


def _fd_errors(problem, X, delta, epsilons, structure):
    n = problem.n
    if structure == "real":
        dA, dG, dQ = unpack_real(delta, n)
    else:
        dA, dG, dQ = StructuredDelta.from_vector(delta, n).to_matrices()
    lin = directional_derivative(problem, X, dA, dG, dQ, structure=structure)
    errs = []
    for eps in epsilons:
        Xe = solve(problem.perturbed(eps * dA, eps * dG, eps * dQ)).solution
        errs.append(np.linalg.norm((Xe - X) / eps - lin))
    return np.array(errs)


@pytest.mark.parametrize("structure", ["real", "complex"])
@pytest.mark.parametrize("which", ["care", "dare"])
def test_finite_differences(which, structure, rng):
    problem, X = example1_problem(1.0) if which == "care" else example2_problem(1)
    for _ in range(3):
        size = {"real": problem.n ** 2 + problem.n * (problem.n + 1),
                "complex": 4 * problem.n ** 2}[structure]
        delta = rng.standard_normal(size)
        delta /= np.linalg.norm(delta)
        errs = _fd_errors(problem, X, delta, [1e-5, 5e-6, 2.5e-6], structure)
        ratios = errs[:-1] / errs[1:]
        assert np.all((ratios > 1.5) & (ratios < 2.5)), ratios


def test_dare_with_zero_a():
    Q = np.array([[2.0, 0.5], [0.5, 1.0]])
    p = RiccatiProblem("dare", np.zeros((2, 2)), np.eye(2), Q)
    Y = solve(p).solution
    assert np.allclose(Y, Q)
    asm = assemble_dare_jacobian(p, Y)
    assert np.allclose(asm.operator, np.eye(4))
    assert np.allclose(asm.blocks["a_re"], 0) and np.allclose(asm.blocks["g_re"], 0)
    dQ = np.array([[0.3, -1.0], [-1.0, 2.0]])
    dX = directional_derivative(p, Y, np.zeros((2, 2)), np.zeros((2, 2)), dQ)
    assert np.allclose(dX, dQ)
    mc = dare_mixed_comp_complex(p, Y)
    assert mc.m == pytest.approx(1.0)
    # kappa1 from the explicit spectral norm of [d5 S1, i d6 S2]
    d = default_deltas(p)
    M = np.hstack([d.values[4] * asm.blocks["q_re"], d.values[5] * asm.blocks["q_im"]])
    assert dare_kappa1_complex(p, Y) == pytest.approx(np.linalg.norm(M, 2) / np.linalg.norm(Y))


def test_real_complex_consistency():
    for problem, X in (example1_problem(1.0), example2_problem(1)):
        real = problem.is_real
        assert real
        k1 = (care_kappa1_complex if problem.kind == "care" else dare_kappa1_complex)(problem, X)
        asm = (assemble_care_jacobian if problem.kind == "care"
               else assemble_dare_jacobian)(problem, X, "real")
        d = default_deltas(problem, "real").values
        M = np.hstack([di * asm.solved_blocks[k] for di, k in zip(d, asm.block_names)])
        first = np.linalg.norm(M, 2) / np.linalg.norm(X)
        assert k1 == pytest.approx(first, rel=1e-10)


def test_kappa1_against_power_iteration():
    p, X = solved(random_care_problem(3, 7, True))
    asm = assemble_care_jacobian(p, X)
    d = np.repeat(default_deltas(p).values,
                  [9, 9, 6, 3, 6, 3])
    J = asm.jacobian * d[None, :]
    v = np.random.default_rng(0).standard_normal(J.shape[1])
    for _ in range(500):
        v = J.conj().T @ (J @ v)
        v /= np.linalg.norm(v)
    est = np.linalg.norm(J @ v) / np.linalg.norm(X)
    assert care_kappa1_complex(p, X) == pytest.approx(est, rel=1e-8)


def test_zero_deltas_switch_directions_off():
    p, X = example1_problem(1.0)
    full = care_kappa1_complex(p, X, DeltaParameters((1, 0, 1, 0, 1, 0)))
    only_q = care_kappa1_complex(p, X, DeltaParameters((0, 0, 0, 0, 1, 0)))
    assert only_q < full
    asm = assemble_care_jacobian(p, X)
    assert only_q == pytest.approx(
        np.linalg.norm(asm.solved_blocks["q_re"], 2) / np.linalg.norm(X))


def test_table1_mixed_and_componentwise():
    expected = {1.0: 1.6667, 1e6: 1.5000, 1e-6: 2.0000}
    for nu, val in expected.items():
        p, X = example1_problem(nu)
        for mc in (care_mixed_comp_real(p, X), care_mixed_comp_complex(p, X)):
            assert mc.m == pytest.approx(val, rel=1e-4)
            assert mc.c == pytest.approx(val, rel=1e-4)


def test_table2_mixed_and_componentwise_large_m():
    for m, (mv, cv) in {5: (3.9507e4, 1.5801e5), 7: (3.9506e6, 1.5802e7)}.items():
        p, Y = example2_problem(m)
        mc = dare_mixed_comp_real(p, Y)
        assert mc.m == pytest.approx(mv, rel=1e-3)
        assert mc.c == pytest.approx(cv, rel=1e-3)


def test_reference_normwise_columns_appear_exchanged():
    # The structured bound evaluates to the reference value listed for the
    # unstructured one and vice versa; pin the computed numbers.
    p, X = example1_problem(1.0)
    assert 1e-8 * care_kappaU_real(p, X) == pytest.approx(4.0054e-8, rel=1e-4)
    assert 1e-8 * care_kappa1U_unstructured_real(p, X) == pytest.approx(3.7258e-8, rel=1e-4)
    p, Y = example2_problem(1)
    assert 1e-12 * dare_kappaU_real(p, Y) == pytest.approx(7.1051e-12, rel=1e-4)
    assert 1e-12 * dare_kappa1U_unstructured_real(p, Y) == pytest.approx(6.6183e-12, rel=1e-4)
    for m, (ks, ku) in {5: (5.2934e-8, 5.0002e-8), 7: (5.2932e-6, 5.0000e-6)}.items():
        p, Y = example2_problem(m)
        assert 1e-12 * dare_kappaU_real(p, Y) == pytest.approx(ks, rel=1e-3)
        assert 1e-12 * dare_kappa1U_unstructured_real(p, Y) == pytest.approx(ku, rel=1e-3)


def test_real_mixed_upper_bound_formula():
    p, X = example1_problem(1.0)
    A, G, Q = p.A, p.G, p.Q
    aX = np.abs(X)
    asm = assemble_care_jacobian(p, X, "real")
    inv = np.linalg.inv(asm.operator)
    term = aX @ np.abs(A) + np.abs(A).T @ aX + aX @ np.abs(G) @ aX + np.abs(Q)
    mU = np.abs(inv).sum(axis=1).max() * term.max() / aX.max()
    assert care_mixed_comp_real(p, X).mU == pytest.approx(mU, rel=1e-12)


def test_zero_solution_is_degenerate():
    p = RiccatiProblem("care", -np.eye(2), np.zeros((2, 2)), np.zeros((2, 2)))
    X = solve(p).solution
    assert care_kappa1_complex(p, X) == 0.0
    assert care_mixed_comp_complex(p, X) == (0.0, 0.0, 0.0, 0.0)
    rep = condition_report(p, X)
    assert rep.degenerate and rep.kappaU == 0.0


def test_zero_solution_entries_drop_out_of_c():
    # X = diag(x1, 0): the second mode has q = 0 and a stable a
    p = RiccatiProblem("care", np.diag([1.0, -2.0]), np.eye(2), np.diag([1.0, 0.0]))
    X = solve(p).solution
    assert X[1, 1] == 0 and X[0, 1] == 0
    mc = care_mixed_comp_real(p, X)
    assert np.isfinite(mc.c) and np.isfinite(mc.cU)
    K = condition_matrix(p, X, "componentwise")
    Kabs = condition_matrix(p, X, "componentwise", relative=False)
    assert K[1, 1] == Kabs[1, 1]


def test_unstable_closed_loop_rejected():
    p = RiccatiProblem("care", np.eye(2), np.eye(2), np.eye(2))
    with pytest.raises(SingularOperatorError):
        assemble_care_jacobian(p, np.zeros((2, 2)))
    p = RiccatiProblem("dare", 2 * np.eye(2), np.eye(2), np.eye(2))
    with pytest.raises(SingularOperatorError):
        assemble_dare_jacobian(p, np.zeros((2, 2)))


def test_delta_parameters_validation():
    with pytest.raises(ValueError):
        DeltaParameters((1.0, 2.0))
    with pytest.raises(ValueError):
        DeltaParameters((1.0, -2.0, 1.0))
    d = DeltaParameters((1, 2, 3, 4, 5, 6))
    assert d.as_real().values == (1.0, 3.0, 5.0)
    p, _ = example1_problem(1.0)
    assert zhou_deltas(p).values == pytest.approx((1.0, 1.0, np.sqrt(2)))
    assert default_deltas(p, "real").values == pytest.approx((1.0, 1.0, np.sqrt(2)))


def test_condition_report_fields():
    p, X = example2_problem(1)
    rep = condition_report(p, X)
    d = rep.as_dict()
    assert d["kind"] == "dare" and d["kappaU_real"] == rep.kappaU_real
    assert rep.operator_condition >= 1
    assert rep.mixed_m <= rep.mixed_mU * SLACK


instances = st.tuples(st.integers(2, 4), st.booleans(), st.integers(0, 2**32 - 1))


def _check_dominance(kind, n, cx, seed):
    gen = random_care_problem if kind == "care" else random_dare_problem
    p, X = solved(gen(n, seed, cx))
    f = {"care": (care_mixed_comp_complex, care_mixed_comp_real, care_kappa1_complex,
                  care_kappaU_complex),
         "dare": (dare_mixed_comp_complex, dare_mixed_comp_real, dare_kappa1_complex,
                  dare_kappaU_complex)}[kind]
    mc = f[0](p, X) if cx else f[1](p, X)
    assert mc.m <= mc.mU * SLACK
    assert mc.c <= mc.cU * SLACK
    assert f[3](p, X) <= np.sqrt(6) * f[2](p, X) * SLACK
    if not cx:
        zd = zhou_deltas(p)
        if kind == "care":
            ks, ku = care_kappaU_real(p, X, zd), care_kappa1U_unstructured_real(p, X, zd)
        else:
            ks, ku = dare_kappaU_real(p, X, zd), dare_kappa1U_unstructured_real(p, X, zd)
        assert ks <= np.sqrt(2) * ku * SLACK


@settings(max_examples=25)
@given(instances)
def test_care_bound_dominance(inst):
    _check_dominance("care", *inst)


@settings(max_examples=25)
@given(instances)
def test_dare_bound_dominance(inst):
    _check_dominance("dare", *inst)


def test_first_order_bound_on_examples():
    from riccond.harness import PerturbationSpec, run_perturbation_experiment
    for (p, X), eps in ((example1_problem(1.0), 1e-8), (example2_problem(1), 1e-12)):
        for seed in range(5):
            row = run_perturbation_experiment(p, PerturbationSpec(eps, seed), X=X)
            assert row.rel_max <= 1.5 * eps * row.m
