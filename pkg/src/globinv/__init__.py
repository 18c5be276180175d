"""Numerical global inverse machinery.

Indicator profiles of Jacobians over balls, accessible-radius certificates,
line lifting by adaptive integration of the inverse-velocity ODE, a condition
ladder for global invertibility, and solvers for f(x)=y built on top of it.
"""

from .certificates import (
    CONDITION_ORDER,
    DiagnosticsEntry,
    DiagnosticsReport,
    RadiusCertificate,
    build_diagnostics,
    expansive_estimate,
    graves_certificate,
    hadamard_integral_check,
    hadamard_levy_check,
    katriel_check,
    plastock_check,
    ps_direction_scan,
    unit_sphere_points,
    weighted_certificate,
)
from .errors import (
    DimensionMismatch,
    EmptySublevel,
    GlobinvError,
    JobValidationError,
    LiftAborted,
    LoopNotInImage,
    MissingBound,
    NonFinite,
    OutOfRange,
    StrategyMismatch,
    TooFewPoints,
    UnknownMap,
    ZeroRadius,
)
from .indicators import (
    FredholmData,
    MuProfile,
    fredholm_data,
    inj_indicator,
    mu_profile,
    rho_of_r,
    sur_indicator,
    unit_ball_points,
)
from .lifting import (
    FlowVerdict,
    LiftOptions,
    LiftOutcome,
    LiftStatus,
    LiftTrajectory,
    gradient_flow,
    lift_line_horizontal,
    lift_line_square,
    path_length,
    weighted_path_length,
)
from .maps import (
    AnalyticFacts,
    MapModel,
    RegistryEntry,
    evaluate,
    jacobian,
    linear_entry,
    linear_map,
    list_map_names,
    registry_entry,
    registry_get,
)
from .solver import (
    FibreReport,
    SolveReport,
    StarReport,
    fibre_enumerate,
    solve,
    star_probe,
    trivialize,
)

__version__ = "0.1.0"

__all__ = [
    "AnalyticFacts",
    "CONDITION_ORDER",
    "DiagnosticsEntry",
    "DiagnosticsReport",
    "DimensionMismatch",
    "EmptySublevel",
    "FibreReport",
    "FlowVerdict",
    "FredholmData",
    "GlobinvError",
    "JobValidationError",
    "LiftAborted",
    "LiftOptions",
    "LiftOutcome",
    "LiftStatus",
    "LiftTrajectory",
    "LoopNotInImage",
    "MapModel",
    "MissingBound",
    "MuProfile",
    "NonFinite",
    "OutOfRange",
    "RadiusCertificate",
    "RegistryEntry",
    "SolveReport",
    "StarReport",
    "StrategyMismatch",
    "TooFewPoints",
    "UnknownMap",
    "ZeroRadius",
    "build_diagnostics",
    "evaluate",
    "expansive_estimate",
    "fibre_enumerate",
    "fredholm_data",
    "gradient_flow",
    "graves_certificate",
    "hadamard_integral_check",
    "hadamard_levy_check",
    "inj_indicator",
    "jacobian",
    "katriel_check",
    "lift_line_horizontal",
    "lift_line_square",
    "linear_entry",
    "linear_map",
    "list_map_names",
    "mu_profile",
    "path_length",
    "plastock_check",
    "ps_direction_scan",
    "registry_entry",
    "registry_get",
    "rho_of_r",
    "solve",
    "star_probe",
    "sur_indicator",
    "trivialize",
    "unit_ball_points",
    "unit_sphere_points",
    "weighted_certificate",
    "weighted_path_length",
    "__version__",
]
