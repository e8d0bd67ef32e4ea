"""Solve the 2x2 CARE family and look at how conditioning changes with nu.

A = [[0, nu], [0, 0]], G = diag(0, 1), Q = I has the closed-form solution
X = [[sqrt(1+2nu)/nu, 1], [1, sqrt(1+2nu)]].  For tiny nu the (1,1) entry
blows up, yet the mixed and componentwise numbers stay near 2: relative
perturbations of the data entries only ever cause relative changes of the
same order in X.  The normwise numbers tell a very different story.
"""
import numpy as np

from riccond import condition_report, example1_problem, solve_care

for nu in (1.0, 1e6, 1e-6):
    problem, X_exact = example1_problem(nu)
    sol = solve_care(problem)
    err = np.linalg.norm(sol.solution - X_exact) / np.linalg.norm(X_exact)
    rep = condition_report(problem, sol.solution)
    print(f"nu = {nu:g}")
    print(f"  relative error vs closed form  {err:.1e}   residual {sol.residual:.1e}")
    print(f"  structured kappaU (real data)  {rep.kappaU_real:.4e}")
    print(f"  unstructured kappa1U           {rep.unstructured_kappa1U:.4e}")
    print(f"  mixed m / componentwise c      {rep.mixed_m:.4f} / {rep.comp_c:.4f}")
    print(f"  simpler bounds mU / cU         {rep.mixed_mU:.4e} / {rep.comp_cU:.4e}")
