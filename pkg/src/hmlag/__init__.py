"""Cohomogeneity-one Hamiltonian-minimal Lagrangian submanifolds.

Construction, classification and independent numerical verification of
the reduced curves and their ambient lifts for four symmetric cases in
complex projective and complex Euclidean space.
"""

from .ambient import (
    ALL_VARIANTS,
    CN_SO,
    CN_TORUS,
    CPN_SO,
    CPN_TORUS,
    ActionCase,
    AmbientPoint,
    kaehler_form,
    moment_map,
)
from .errors import HmlagError
from .lift import (
    ImmersionCloud,
    constant_immersion,
    export_cloud,
    hopf_lift_cloud,
    sweep_orbit,
    volume_identity,
)
from .reduced_ode import (
    InitialCondition,
    ReducedProblem,
    constant_solutions,
    first_integral,
    forbidden_lambda,
    lambda_from_ic,
)
from .reduction import MetricProfile, make_profile, orbit_param
from .solver import (
    Classification,
    Trajectory,
    closed_search,
    closure_residual,
    integrate,
    period_omega,
    shooting_period,
    theta_max,
    turning_radius,
)
from .verify import (
    VerificationReport,
    delta_alpha_H_fd,
    codifferential_check,
    geodesic_curvature,
    lagrangian_residual,
    mean_curvature_fd,
    quotient_residual,
    verify_trajectory,
)

__version__ = "0.1.0"
