"""Game module: one-shot CPU allocation game and its equilibria"""

from .core import (
    Allocation,
    DataSizeVector,
    GameConfig,
    SlotOutcome,
    count_actions,
    enumerate_actions,
    fit_granularity,
    protection_level,
    quantize_data,
    resolve_slot,
    sign,
    utility_attacker,
    utility_defender,
)
from .equilibrium import (
    MixedStrategy,
    NeAnalysis,
    asymmetric_ne,
    best_response_oracle,
    expected_protection_exact,
    expected_sign_exact,
    ne_analysis,
    sample_feasible,
    sample_marginal,
    symmetric_ne,
)

__all__ = [
    'Allocation', 'DataSizeVector', 'GameConfig', 'SlotOutcome', 'count_actions',
    'enumerate_actions', 'fit_granularity', 'protection_level', 'quantize_data',
    'resolve_slot', 'sign', 'utility_attacker', 'utility_defender',
    'MixedStrategy', 'NeAnalysis', 'asymmetric_ne', 'best_response_oracle',
    'expected_protection_exact', 'expected_sign_exact', 'ne_analysis',
    'sample_feasible', 'sample_marginal', 'symmetric_ne',
]
