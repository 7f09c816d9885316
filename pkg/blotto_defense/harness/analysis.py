"""
Closed-form equilibrium tables for the ne-analyze command
"""

import logging
from typing import Iterable, List, Optional, Sequence, Tuple

import pandas as pd

from ..game.core import DataSizeVector, GameConfig, quantize_data
from ..game.equilibrium import ASYMMETRIC, SYMMETRIC, NeAnalysis, analytic_utility_defender, ne_analysis

logger = logging.getLogger(__name__)

REGIMES = {'sym': SYMMETRIC, 'asym': ASYMMETRIC, SYMMETRIC: SYMMETRIC, ASYMMETRIC: ASYMMETRIC}

SUMMARY_COLUMNS = ['regime', 'devices', 'defense_budget', 'attack_budget', 'expected_protection',
                   'expected_utility_defender', 'analytic_utility_defender']


def analyze_point(regime: str, defense_budget: int, attack_budget: int, devices: Optional[int] = None,
                  data: Optional[Sequence[float]] = None,
                  quant_levels: int = 10) -> Tuple[NeAnalysis, GameConfig, DataSizeVector]:
    """
    Equilibrium for one parameter point

    Args:
        regime: 'sym'/'symmetric' or 'asym'/'asymmetric'
        devices: Number of devices; taken from `data` when omitted
        data: Data sizes in [0, 1]; defaults to 1.0 on every device
    """
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}; expected sym or asym")
    if devices is None:
        if data is None:
            raise ValueError("either devices or data sizes are required")
        devices = len(data)
    game = GameConfig(devices, defense_budget, attack_budget, quant_levels)
    B = quantize_data(data if data is not None else [1.0] * devices, quant_levels)
    return ne_analysis(game, B, REGIMES[regime]), game, B


def summary_row(analysis: NeAnalysis, game: GameConfig, B: DataSizeVector) -> dict:
    return {
        'regime': analysis.regime,
        'devices': game.devices,
        'defense_budget': game.defense_budget,
        'attack_budget': game.attack_budget,
        'expected_protection': analysis.expected_protection,
        'expected_utility_defender': analysis.expected_utility_defender,
        'analytic_utility_defender': analytic_utility_defender(game, B, analysis.regime),
    }


def marginal_table(analysis: NeAnalysis) -> pd.DataFrame:
    """Long-format pmfs: one row per (device, CPU count) with mass for either player"""
    x, y = analysis.defender_strategy, analysis.attacker_strategy
    width = max(x.support_size, y.support_size)
    rows = []
    for i in range(x.devices):
        for c in range(width):
            p = float(x.row(i)[c]) if c < x.support_size else 0.0
            q = float(y.row(i)[c]) if c < y.support_size else 0.0
            if p or q:
                rows.append({'device': i + 1, 'cpus': c, 'defender_p': p, 'attacker_p': q})
    return pd.DataFrame(rows, columns=['device', 'cpus', 'defender_p', 'attacker_p'])


def ne_sweep(regime: str, defense_budgets: Iterable[int], attack_budget: int, devices: Iterable[int],
             quant_levels: int = 10) -> pd.DataFrame:
    """One summary row per (D, S_M) point with 1.0 data on every device"""
    rows: List[dict] = []
    for d in devices:
        for sm in defense_budgets:
            rows.append(summary_row(*analyze_point(regime, sm, attack_budget, d, quant_levels=quant_levels)))
    logger.info(f"Computed {len(rows)} equilibrium points")
    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)
