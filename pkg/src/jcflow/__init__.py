"""Scale flow of the Jaynes-Cummings coupling.

Truncated-space operators and closed-form evolutions, the multivalued
running of the measured coupling with interaction time, the effective
S-matrix flow in the detuning scale, and branch identification from
decay spectra.
"""

from .operators import (
    ModelParams,
    BasisLabel,
    OperatorMatrix,
    build_operators,
    evolution_resonant,
    evolution_detuned,
    matrix_exponential_oracle,
    amplitude,
    subsystem_block,
    guarded_indices,
    unitarity_defect,
)
from .flow import (
    BranchIndex,
    FlowState,
    SpectrumTable,
    arcsin_branch,
    renormalised_coupling_branches,
    perturbative_bare_coupling,
    spectrum,
    beta_one_loop,
    beta_exact,
    flow_integrate,
    flow_integrate_one_loop,
    c_function,
    logistic_interpolation_check,
)
from .smatrix import (
    FlowParams,
    ContinuationBranch,
    s_matrix_detuned,
    large_k_asymptote,
    effective_t_matrix,
    renorm_condition_rhs,
    renorm_condition_slope,
    renorm_condition_residual,
    solve_flow,
    bifurcation_scan,
)
from .branchid import (
    Measurement,
    branch_degenerate,
    unit_decay_spectrum,
    identify_branch,
    pairwise_distinctness,
)

__version__ = "0.1.0"

__all__ = [
    "ModelParams", "BasisLabel", "OperatorMatrix", "build_operators",
    "evolution_resonant", "evolution_detuned", "matrix_exponential_oracle",
    "amplitude", "subsystem_block", "guarded_indices", "unitarity_defect",
    "BranchIndex", "FlowState", "SpectrumTable", "arcsin_branch",
    "renormalised_coupling_branches", "perturbative_bare_coupling", "spectrum",
    "beta_one_loop", "beta_exact", "flow_integrate", "flow_integrate_one_loop",
    "c_function", "logistic_interpolation_check",
    "FlowParams", "ContinuationBranch", "s_matrix_detuned", "large_k_asymptote",
    "effective_t_matrix", "renorm_condition_rhs", "renorm_condition_slope",
    "renorm_condition_residual", "solve_flow", "bifurcation_scan",
    "Measurement", "branch_degenerate", "unit_decay_spectrum",
    "identify_branch", "pairwise_distinctness",
]
