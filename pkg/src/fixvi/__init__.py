"""Hybrid extragradient iterations for common fixed points of nonexpansive families and variational inequalities."""
from .core import DimensionError, ToleranceConfig, make_rng
from .sets import (
    Ball, Box, Halfspace, Hyperplane, InfeasibleSetError, Intersection, ProjectionNonConvergence,
    Simplex, WholeSpace, contains, project, project_batch, project_intersection,
)
from .operators import (
    Affine, AveragedComposition, CertificationError, Constant, DepthError, GradientQuadratic, Identity,
    Linear, MappingOperator, ProjectOnto, ResidualOfPseudocontraction, Scale, WLimitNotReached, WMapping,
    Zero, certify_ism, ism_from_lipschitz, ism_from_pseudocontraction, verify_nonexpansive, w_apply,
    w_limit_apply,
)
from .diagnostics import Record, Trace, fejer_check, oracle_solve, residual_fix, residual_vi, write_trace
from .schemes import (
    ConstantSchedule, CorridorError, HarmonicClamped, PeriodicSchedule, SchemeSpec, StopRule, run_scheme,
)
from .problems import (
    ProblemInstance, gen_common_fixed_family, gen_contraction_speed, gen_pseudocontractive,
    gen_quadratic_box, speed_comparison,
)

__all__ = [
    "Affine", "AveragedComposition", "Ball", "Box", "CertificationError", "Constant",
    "ConstantSchedule", "CorridorError", "DepthError", "DimensionError", "GradientQuadratic",
    "Halfspace", "HarmonicClamped", "Hyperplane", "Identity", "InfeasibleSetError", "Intersection",
    "Linear", "MappingOperator", "PeriodicSchedule", "ProblemInstance", "ProjectOnto",
    "ProjectionNonConvergence", "Record", "ResidualOfPseudocontraction", "Scale", "SchemeSpec",
    "Simplex", "StopRule", "ToleranceConfig", "Trace", "WLimitNotReached", "WMapping",
    "WholeSpace", "Zero", "certify_ism", "contains", "fejer_check", "gen_common_fixed_family",
    "gen_contraction_speed", "gen_pseudocontractive", "gen_quadratic_box", "ism_from_lipschitz",
    "ism_from_pseudocontraction", "make_rng", "oracle_solve", "project", "project_batch",
    "project_intersection", "residual_fix", "residual_vi", "run_scheme", "speed_comparison",
    "verify_nonexpansive", "w_apply", "w_limit_apply", "write_trace",
]

__version__ = "0.1.0"
