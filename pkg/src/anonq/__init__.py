"""Query-efficient approximate equilibria of anonymous games."""
from .algorithms import (
    SmoothedParams,
    default_params,
    derive_params,
    lipschitz_pure_ne,
    smoothed_approx_ne,
    symmetric_pne,
    uniform_mix,
)
from .errors import ConstructionError, DomainError, NotFoundError, ScaleError
from .game import (
    AnonymousGame,
    EquilibriumReport,
    MixedProfile,
    classify,
    evaluate_profile,
    smoothed_game_exact,
    step_lipschitz_constant,
)
from .oracle import QueryLedger, TableOracle

__all__ = [
    "AnonymousGame",
    "ConstructionError",
    "DomainError",
    "EquilibriumReport",
    "MixedProfile",
    "NotFoundError",
    "QueryLedger",
    "ScaleError",
    "SmoothedParams",
    "TableOracle",
    "classify",
    "default_params",
    "derive_params",
    "evaluate_profile",
    "lipschitz_pure_ne",
    "smoothed_approx_ne",
    "smoothed_game_exact",
    "step_lipschitz_constant",
    "symmetric_pne",
    "uniform_mix",
]
