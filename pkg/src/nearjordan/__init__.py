"""Nearest matrices and parameter values with a multiple nonderogatory eigenvalue.

The solver runs Newton's method on the versal deformation functions
q_2, ..., q_d of a d-fold eigenvalue cluster and returns the multiple
eigenvalue with its Jordan chain at the converged point.
"""

from nearjordan.chain import JordanChain, chain_residual, jordan_block, jordan_chain
from nearjordan.diagapprox import (
    EigenSensitivity,
    diagonal_triple,
    eigen_sensitivities,
    naive_crossing_step,
    nearest_double_step,
    versal_jacobian_diag,
)
from nearjordan.errors import (
    ChainDegenerateError,
    ClusterSelectionError,
    InseparableClusterError,
    RankDeficientError,
    ReorderError,
    RepeatedEigenvalueError,
    VersalError,
)
from nearjordan.families import (
    AffineFamily,
    MatrixFamily,
    family_example1,
    family_swallow_tail,
    family_versal_form,
    finite_difference_derivative,
    matrix_example2,
    matrix_frank,
)
from nearjordan.invariant import (
    ClusterSelection,
    InvariantTriple,
    SeparationWarning,
    block_diagonalize,
    separation_estimate,
)
from nearjordan.newton import (
    NewtonConfig,
    NewtonResult,
    approximate_eigenvalue,
    assemble_linear_system,
    nearest_defective_matrix,
    newton_iterate,
    select_cluster,
    solve_step,
)
from nearjordan.versal import (
    VersalLinearization,
    VersalValues,
    versal_jacobian,
    versal_matrix_gradients,
    versal_values,
)

__version__ = "0.1.0"

__all__ = [
    "AffineFamily",
    "ChainDegenerateError",
    "ClusterSelection",
    "ClusterSelectionError",
    "EigenSensitivity",
    "InseparableClusterError",
    "InvariantTriple",
    "JordanChain",
    "MatrixFamily",
    "NewtonConfig",
    "NewtonResult",
    "RankDeficientError",
    "ReorderError",
    "RepeatedEigenvalueError",
    "SeparationWarning",
    "VersalError",
    "VersalLinearization",
    "VersalValues",
    "approximate_eigenvalue",
    "assemble_linear_system",
    "block_diagonalize",
    "chain_residual",
    "diagonal_triple",
    "eigen_sensitivities",
    "family_example1",
    "family_swallow_tail",
    "family_versal_form",
    "finite_difference_derivative",
    "jordan_block",
    "jordan_chain",
    "matrix_example2",
    "matrix_frank",
    "naive_crossing_step",
    "nearest_defective_matrix",
    "nearest_double_step",
    "newton_iterate",
    "select_cluster",
    "separation_estimate",
    "solve_step",
    "versal_jacobian",
    "versal_jacobian_diag",
    "versal_matrix_gradients",
    "versal_values",
]
