"""Structured condition numbers and condition estimation for algebraic Riccati equations."""
from .exceptions import (ConvergenceError, DimensionError, NoStabilizingSolutionError,
                         RiccondError, SingularOperatorError, StructureError)
from .structured import (StructuredDelta, pack_real, skew_expansion, skew_pack, skew_unpack,
                         sym_expansion, sym_pack, sym_unpack, unpack_real, unvec, vec,
                         vec_transpose_permutation)
from .lyapunov import solve_continuous_lyapunov, solve_discrete_lyapunov
from .riccati import (RiccatiProblem, RiccatiSolution, care_residual, dare_residual, solve,
                      solve_care, solve_dare)
from .condnum import (ConditionReport, DeltaParameters, JacobianAssembly,
                      assemble_care_jacobian, assemble_dare_jacobian,
                      care_kappa1_complex, care_kappa1U_unstructured_real,
                      care_kappaU_complex, care_kappaU_real, care_mixed_comp_complex,
                      care_mixed_comp_real, condition_matrix, condition_report,
                      dare_kappa1_complex, dare_kappa1U_unstructured_real,
                      dare_kappaU_complex, dare_kappaU_real, dare_mixed_comp_complex,
                      dare_mixed_comp_real, default_deltas, directional_derivative,
                      zhou_deltas)
from .sce import (ConditionMatrixEstimate, SceConfig, draw_structured_directions, sce,
                  sce_care_componentwise, sce_care_normwise, sce_dare_componentwise,
                  sce_dare_normwise, wallis_factor, wallis_ratio)
from .harness import (ExperimentRow, PerturbationSpec, example1_problem, example2_problem,
                      gen_structured_perturbation, reproduce_table1, reproduce_table2,
                      run_perturbation_experiment)

__version__ = "0.1.0"
