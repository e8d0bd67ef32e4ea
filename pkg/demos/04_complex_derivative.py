"""The structured derivative of a complex CARE solution, checked numerically.

The derivative acts on the 4n^2 real coordinates
[vec Re dA, vec Im dA, sym Re dG, skew Im dG, sym Re dQ, skew Im dQ],
so Hermitian structure of dG and dQ is built in.  A forward difference along
a random structured direction converges to it at first order.
"""
import numpy as np

from riccond import StructuredDelta, directional_derivative, solve_care
from riccond.condnum import care_kappa1_complex, care_kappaU_complex
from riccond.harness import random_care_problem

problem = random_care_problem(3, seed=7, complex_data=True)
X = solve_care(problem).solution

rng = np.random.default_rng(1)
d = rng.standard_normal(4 * problem.n ** 2)
dA, dG, dQ = StructuredDelta.from_vector(d / np.linalg.norm(d), problem.n).to_matrices()
lin = directional_derivative(problem, X, dA, dG, dQ)

for eps in (1e-4, 1e-5, 1e-6):
    Xe = solve_care(problem.perturbed(eps * dA, eps * dG, eps * dQ)).solution
    print(f"eps = {eps:.0e}: |finite difference - derivative| = "
          f"{np.linalg.norm((Xe - X) / eps - lin):.2e}")

k1 = care_kappa1_complex(problem, X)
print(f"kappa1 = {k1:.4e}, kappaU = {care_kappaU_complex(problem, X):.4e} "
      f"(at most sqrt(6) kappa1 = {np.sqrt(6) * k1:.4e})")
