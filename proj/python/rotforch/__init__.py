"""Rotating Forchheimer flow in porous media: solver and estimate certification."""

from ._core import (
    REPORT_SCHEMA,
    ConfigError,
    ConvergenceError,
    DegenerateCoefficient,
    DivergentFunctional,
    FieldDomainError,
    FieldExpr,
    InvalidExponent,
    InvalidInput,
    LocalLaw,
    ParseError,
    RotforchError,
    RunConfig,
    SmallnessViolation,
    StiffnessError,
    __version__,
    certify,
    compute_exponents,
    default_alpha,
    default_config_text,
    eval_F,
    invert_F,
    load_config,
    mms,
    parse_config,
    simulate,
    verify,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
