"""Coverage-guided fuzzing with signal-shaped mutations."""

from .campaign import LOGICAL_RATE, Campaign, CampaignConfig, CampaignReport, Finding, fuzz_campaign
from .mutators import (
    OPERATORS,
    SIGNAL_OPERATORS,
    MutationConfig,
    MutationContext,
    apply_math,
    bit_flip_all,
    curve_values,
    extremes,
    mut_bit_flip,
    mut_curve_signal,
    mut_havoc,
    mut_math,
    mut_random_set,
    mut_square_signal,
    mutate,
    mutate_bytes,
)
from .pool import PoolEntry, SeedPool, evaluated_conditions, pool_update, seed_select

__all__ = [
    "Campaign",
    "CampaignConfig",
    "CampaignReport",
    "Finding",
    "LOGICAL_RATE",
    "MutationConfig",
    "MutationContext",
    "OPERATORS",
    "PoolEntry",
    "SIGNAL_OPERATORS",
    "SeedPool",
    "apply_math",
    "bit_flip_all",
    "curve_values",
    "evaluated_conditions",
    "extremes",
    "fuzz_campaign",
    "mut_bit_flip",
    "mut_curve_signal",
    "mut_havoc",
    "mut_math",
    "mut_random_set",
    "mut_square_signal",
    "mutate",
    "mutate_bytes",
    "pool_update",
    "seed_select",
]
