"""Difficulty-adaptive variant advantages for group-relative policy optimization."""

from ._core import (
    DivaError,
    binary_advantages,
    default_config,
    group_stats,
    optimal_mu,
    projected_signal,
    run_pipeline,
    run_training,
    updated_score,
    variant_difficulty,
    zscore_advantages,
)

__all__ = [
    "DivaError",
    "binary_advantages",
    "default_config",
    "group_stats",
    "optimal_mu",
    "projected_signal",
    "run_pipeline",
    "run_training",
    "updated_score",
    "variant_difficulty",
    "zscore_advantages",
]
