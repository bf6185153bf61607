"""Jacobi plane-rotation algorithms for best rank-p orthogonal approximation
of real symmetric tensors."""

from .symtensor import (
    OrthoMatrix,
    StiefelMatrix,
    StructuralError,
    SymTensor,
    contract_all,
    frobenius_norm,
    load_tensor,
    random_orthogonal,
    random_symmetric,
    save_tensor,
    subtensor,
    symmetrize,
)
from .geometry import (
    DiagnosticReport,
    GradientMatrix,
    HypothesisError,
    cost_f,
    cost_f_stiefel,
    d_ij,
    diagnostics,
    gamma_ij,
    lambda_matrix,
    sigma_ij,
    stiefel_gradient,
)
from .rotations import (
    PairClass,
    RotationSolution,
    apply_givens,
    givens,
    real_roots,
    solve_c1_order3,
    solve_c1_order4,
    solve_c2_order3,
    solve_c2_order4,
    solve_generic,
    solve_pair,
)
from .orderings import (
    Move,
    PairOrdering,
    SigmaSearchResult,
    cyclic_ordering,
    equivalent_to_sigma0,
    in_sigma0,
    random_ordering,
    verify_identity_decomposition,
)
from .drivers import (
    ApproximationResult,
    BreakdownError,
    ConfigError,
    IterationTrace,
    RunConfig,
    extract_result,
    hosvd_frame,
    hosvd_init,
    run_general,
    run_jacobi_g,
    run_jlroa,
    run_shopm,
    run_slroat,
)
from .kofidis import kofidis_tensor

__version__ = "0.1.0"
