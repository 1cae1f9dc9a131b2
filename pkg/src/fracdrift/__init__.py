"""fracdrift: a numerical laboratory for the fractional Schrodinger equation
with drift and its exterior-measurement inverse problem."""

__version__ = "0.1.0"

from .domain import (
    Annulus,
    Ball,
    BoxRegion,
    GridSpec,
    Interval,
    RegionLayout,
    ScalarField,
    VectorField,
    build_layout,
    bump_field,
    plateau_field,
    polynomial_field,
)
from .fraclap import (
    NonlocalOperator,
    SobolevMetric,
    assemble_fraclap,
    build_sobolev_metric,
    getoor_constant,
    normalization_constant,
    poincare_ratio,
    sobolev_norm,
    spectral_oracle_apply,
)
from .solver import (
    Coefficients,
    DirichletSolution,
    assemble_system,
    check_eigenvalue_condition,
    gradient,
    solve_adjoint,
    solve_forward,
)
from .dnmap import (
    DNMatrix,
    alessandrini_residual,
    dn_apply,
    dn_matrix,
    operator_norm_star,
)
from .runge import (
    RungeControl,
    RungeOperator,
    SpectralTriple,
    alpha_sweep,
    approximate_targets_for_reconstruction,
    assemble_runge,
    svd_triple,
    truncated_control,
)
from .reconstruct import (
    MeasurementSet,
    ReconstructionResult,
    VanishingOrderReport,
    det_h,
    generate_measurements,
    k_of_n,
    n0_count,
    perturb_measurements,
    recover_interior_field,
    recover_pointwise,
    vanishing_order_check,
)
from .experiments import (
    StabilityCurve,
    genericity_trial_suite,
    run_scenario,
    stability_sweep,
)
