"""Frame-covariant time-dependent mechanics.

Declare Lagrangians and Hamiltonians as expression text over the fixed
coordinate names ``t, y1.., v1.., p1.., p0``, then compute Poisson
brackets, integrate Hamilton or Lagrange dynamics, change reference
frames, check canonical transformations, track conservation currents,
diagnose degenerate constraints and transform relativistic velocities.

The ``tdmech`` console script exposes the same operations as batch
commands over declarative config files.
"""

from .errors import (
    AtInfinity,
    ChartBoundary,
    ConfigError,
    DomainError,
    InputError,
    IntegrationBlowup,
    MechanicsError,
    NoConvergence,
    OffShellTrajectory,
    ParseError,
    SingularLagrangian,
    SingularMatrix,
    SpacelikeDirection,
    UnboundVariableError,
)
from .expr import (
    Expression,
    differentiate,
    expression,
    parse,
    substitute,
    value_gradient,
    value_gradient_hessian,
)
from .bundle import (
    FibredAutomorphism,
    HomogeneousPhasePoint,
    JetPoint,
    JetTangent,
    ReferenceFrame,
    RepeatedJetPoint,
    SecondJetPoint,
    VerticalPhasePoint,
    VerticalTangent,
    adapted_coordinates,
    holonomic_phase_transform,
    lift_to_phase,
    relative_velocity,
)
from .integrate import Trajectory, difference_quotients
from .lagrange import (
    Lagrangian,
    cartan_residual,
    dynamic_rhs,
    euler_lagrange_residual,
    first_variation,
    integrate_lagrange,
    legendre_invert,
    legendre_map,
    poincare_cartan,
)
from .hamilton import (
    CanonicalReport,
    CanonicalTransform,
    GeneratingFunctionReport,
    HamiltonianForm,
    canonical_check,
    canonical_from_automorphism,
    canonical_relation_residuals,
    frame_splitting,
    generating_function_residual,
    hamilton_rhs,
    hamiltonian_map,
    integrate_hamilton,
    phase_space_lagrangian,
)
from .poisson import (
    bracket_homogeneous,
    bracket_lagrangian,
    bracket_vertical,
    evolution_derivative,
    evolution_derivative_split,
    hamiltonian_vector_field,
    lagrangian_hamiltonian_vector_field,
)
from .constraints import (
    AssociationReport,
    ConstrainedFlowReport,
    ConstraintSpace,
    association_check,
    cartan_pullback_residual,
    constrained_hamilton_residual,
    constraint_residual,
    tangency_residual,
)
from .currents import (
    CurrentReport,
    energy_function,
    hamiltonian_current,
    lie_derivative,
    symmetry_current,
    weak_identity_residual,
)
from .relativity import (
    ChartTransform,
    Metric,
    SubmanifoldJet,
    TangentVector,
    compose_charts,
    exchange_chart,
    hyperboloid_residual,
    identity_chart,
    lorentz_boost,
    normalize_to_hyperboloid,
    project_tangent,
    transform_jet,
    velocity_bound_check,
)
from .config import SystemConfig, load_config
