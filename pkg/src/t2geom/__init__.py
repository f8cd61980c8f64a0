"""Geometry of regular second-order Lagrangians on the second-order tangent bundle T²M."""
from .calculus import batch_derivatives, fd_oracle_partials, partials, taylor, tulczyjew_dT
from .connection import (
    ConnectionData,
    adapted_frame,
    complete_lift,
    connection,
    n1_coeffs,
    n2_coeffs,
    nabla1,
    nabla2,
    nabla_g,
    nabla2_g,
    projectors,
    connection_condition_residuals,
)
from .dtensor import metric_law_deviation, z2_law_deviation
from .dynamics import (
    Trajectory,
    action_variation_check,
    attach_monitors,
    integrate_craig_synge,
    solution_curve,
)
from .errors import (
    ConfigError,
    DegenerateLagrangian,
    DomainError,
    ParseError,
    SingularJacobian,
    SingularMetric,
    StepError,
    T2GeomError,
    VariableIndexError,
)
from .expr import parse_expression
from .jets import (
    CotangentVecT2M,
    Diffeo2,
    Jet2Point,
    TangentVecT2M,
    apply_J,
    apply_Jstar,
    jet_transform,
    liouville_C1,
    liouville_C2,
)
from .jetscalar import Jet
from .lagrangian import (
    BuiltinLagrangian,
    ExpressionLagrangian,
    PullbackLagrangian,
    check_regularity,
    metric_tensor,
    omega1,
    omega2,
    theta1,
    theta2,
)
from .registry import builtin
from .semiriemann import SemiRiemannianSpec, lagrangian_L1, lagrangian_L2, z2
from .semispray import apply_S, apply_S2, semispray_coeffs, semispray_vector
from .verify import VERIFY_NAMES, point_residuals

__version__ = "0.1.0"
