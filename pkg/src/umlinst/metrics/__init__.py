"""Diversity scores and realistic-value validators."""

from .diversity import (
    CorpusDiversity, DiversityScore, MeanStd, ScoreKind, diversity_across, diversity_within,
    levenshtein, pair_diversity_exact, pair_diversity_levenshtein, set_diversity, value_bags,
)
from .validators import (
    VALIDATORS, BindingResult, SemanticReport, Validator, ValidatorBinding, iban_remainder,
    register_validator, run_validators,
)

__all__ = [
    "VALIDATORS", "BindingResult", "CorpusDiversity", "DiversityScore", "MeanStd", "ScoreKind",
    "SemanticReport", "Validator", "ValidatorBinding", "diversity_across", "diversity_within",
    "iban_remainder", "levenshtein", "pair_diversity_exact", "pair_diversity_levenshtein",
    "register_validator", "run_validators", "set_diversity", "value_bags",
]
