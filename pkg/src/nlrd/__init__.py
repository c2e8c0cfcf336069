"""Nonlocal bistable reaction-diffusion on perforated domains.

Solvers and verification experiments for the stationary problem
Lu + f(u) = 0 on R^N minus a compact obstacle, where L is a unit-mass
convolution diffusion operator. The package certifies rigidity of
solutions around convex obstacles, exhibits the exact piecewise
counterexample around an annulus, constructs maximal ball solutions by
monotone iteration, and verifies the comparison, sweeping, and regularity
structure of the discrete operator.
"""

from .errors import NlrdError, NumericalFailure, PreconditionError
from .grid import (
    Field,
    Grid,
    HalfSpace,
    HolderEstimate,
    field_to_csv,
    holder_quotient,
    make_field,
    make_grid,
    sup_metrics,
)
from .kernels import Kernel, KernelConstants, KernelProfile, build_kernel, kernel_constants, marginal_j1
from .nonlinearity import (
    Bistable,
    ExtendedNonlinearity,
    Stiffness,
    bistable_from_callables,
    extend,
    make_bistable,
    stiffness,
)
from .obstacles import (
    DeformationFamily,
    Obstacle,
    PsiSpec,
    build_obstacle,
    deformation_family,
    jmass,
    thicken,
)
from .operators import Problem, apply_L, apply_L_ball, ball_mask, residual
from .solver import (
    EvolveResult,
    FrontProfile,
    MaximalSolution,
    SubSolution,
    build_subsolution,
    energy,
    evolve,
    evolve_ball,
    front_profile,
    maximal_solution,
    principal_eigenvalue,
    resolvent_solve,
)
from .verify import (
    Check,
    Report,
    bounds_suite,
    comparison_suite,
    counterexample_check,
    counterexample_field,
    liouville_experiment,
    robustness_experiment,
    sliding_radius,
)

__version__ = "0.1.0"
