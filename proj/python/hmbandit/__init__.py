"""Bandit learning in housing markets: mechanisms, learners and a simulator."""

from ._hmbandit import (
    HmbError,
    MarketInstance,
    core_oracle,
    find_blocking_coalition,
    is_sttcb,
    load_instance,
    lower_bound_instance,
    min_gap,
    monte_carlo,
    random_instance,
    run_episode,
    save_instance,
    sttcb_instance,
    theoretical_bounds,
    ttc,
    ttc_rankings,
    validate_instance,
    yrmh_igyt,
)

__all__ = [
    "HmbError",
    "MarketInstance",
    "core_oracle",
    "find_blocking_coalition",
    "is_sttcb",
    "load_instance",
    "lower_bound_instance",
    "min_gap",
    "monte_carlo",
    "random_instance",
    "run_episode",
    "save_instance",
    "sttcb_instance",
    "theoretical_bounds",
    "ttc",
    "ttc_rankings",
    "validate_instance",
    "yrmh_igyt",
]
