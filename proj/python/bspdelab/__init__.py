"""Backward SPDE laboratory: python surface over the C++ core.

Exposes the spatial operators, the penalty family, noise-tree algebra, the
backward solvers, and the comparison / risk-measure experiments.
"""

from ._core import (
    CoefficientField,
    ConfigError,
    DriverError,
    Expr,
    Grid,
    LevyModel,
    NoiseTree,
    NumericError,
    PreconditionError,
    ProblemSpec,
    SchemeParams,
    apply_diffusion,
    eval_expr,
    gradient,
    l2_inner,
    make_grid,
    make_levy_model,
    parse_expr,
    penalty,
    positive_part_defect,
    rho,
    run_comparison,
    solve_deterministic,
    solve_stochastic_root,
)

__all__ = [
    "CoefficientField",
    "ConfigError",
    "DriverError",
    "Expr",
    "Grid",
    "LevyModel",
    "NoiseTree",
    "NumericError",
    "PreconditionError",
    "ProblemSpec",
    "SchemeParams",
    "apply_diffusion",
    "eval_expr",
    "gradient",
    "l2_inner",
    "make_grid",
    "make_levy_model",
    "parse_expr",
    "penalty",
    "positive_part_defect",
    "rho",
    "run_comparison",
    "solve_deterministic",
    "solve_stochastic_root",
]
