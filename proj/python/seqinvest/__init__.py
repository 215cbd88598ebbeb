"""Equilibria, optima and simulation for sequential investment games."""

from ._core import (
    BracketError,
    DomainError,
    InfeasibleError,
    Optimum,
    ParseError,
    Profile,
    RewardRule,
    RuleConstructionError,
    ShapeError,
    SuccessRate,
    best_response_dynamics,
    first_best_investment,
    flatten_tail,
    functionals,
    initiator_optimal,
    near_constant_feasible,
    region_sweep,
    register_success_rate,
    self_financed_optimal,
    simulate,
    socially_optimal,
    synthesize_rule,
    verify_equilibrium,
)

__all__ = [
    "BracketError",
    "DomainError",
    "InfeasibleError",
    "Optimum",
    "ParseError",
    "Profile",
    "RewardRule",
    "RuleConstructionError",
    "ShapeError",
    "SuccessRate",
    "best_response_dynamics",
    "first_best_investment",
    "flatten_tail",
    "functionals",
    "initiator_optimal",
    "near_constant_feasible",
    "region_sweep",
    "register_success_rate",
    "self_financed_optimal",
    "simulate",
    "socially_optimal",
    "synthesize_rule",
    "verify_equilibrium",
]
