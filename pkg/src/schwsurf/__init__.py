"""Numerical checks for free-boundary minimal surfaces outside a horizon.

The package verifies, at desk scale, a family of statements about the
totally geodesic plane through the center of the conformally flat
static black-hole slice: its Morse index, the largest radius of
stability, the monotone weighted-area ratio, and the boundary-length
bound with its equality case.  Two independent solver routes (adaptive
shooting and a finite-difference eigensolver) cross-check each other,
and closed-form solutions anchor both.
"""

__version__ = "0.1.0"

from .errors import (
    DomainError,
    GeometryError,
    IntegrationError,
    NoSingularityError,
    PreconditionError,
    QuadratureError,
    SearchError,
    SingularityError,
)
from .geometry import (
    SchwarzschildModel,
    areal_from_distance,
    areal_from_isotropic,
    asymptotic_defect,
    conformal_exponent,
    distance_from_areal,
    distance_from_isotropic,
    isotropic_from_areal,
    static_potential,
    static_potential_from_isotropic,
)
from .mode_odes import (
    ModeParams,
    RadialSolution,
    barrier_envelope,
    barrier_psi_k,
    cbar,
    closed_form_v0,
    integrate_v,
    log_barrier_envelope,
    psi_c,
    singularity_radius,
    v_coefficient,
)
from .quadrature import QuadSpec
from .spectral import (
    IndexReport,
    Spectrum,
    SpectrumEntry,
    eigenfunction,
    eigenvalues_shooting,
    morse_index,
    negative_count,
    rayleigh_quotient,
    stability_radius,
)
from .fd_oracle import (
    DiscreteModeProblem,
    assemble,
    lowest_eigenvalues,
    negative_count_fd,
    richardson_lowest,
)
from .surfaces import (
    BoundaryBoundReport,
    DensityReport,
    MonotonicityReport,
    ParamSurface,
    SphereCurve,
    ball_filter,
    boundary_bound_check,
    boundary_length,
    cone_mean_curvature,
    curve_from_callable,
    defect_integral,
    density_at_infinity,
    formula_residual,
    great_circle,
    latitude_circle,
    make_cone,
    make_general,
    make_plane,
    monotonicity_report,
    mu_integral,
    area_integral,
    radial_normal_component,
    random_rotation,
    rotate_curve,
    rotate_surface,
)

__all__ = [name for name in dir() if not name.startswith("_")]
