"""
Nash equilibrium marginals for the CPU allocation game
Closed-form symmetric/asymmetric strategies, exact expected-value oracles,
samplers and brute-force best responses
"""

import logging
from dataclasses import dataclass
from math import floor
from typing import Optional, Sequence, Tuple

import numpy as np

from .. import config
from ..errors import DimensionMismatchError, EmptyStorageError, RegimeInapplicableError
from .core import (
    Allocation,
    DataSizeVector,
    GameConfig,
    Weights,
    _weights,
    action_matrix,
    enumerate_actions,
)

logger = logging.getLogger(__name__)

SYMMETRIC = 'symmetric'
ASYMMETRIC = 'asymmetric'


@dataclass(frozen=True)
class MixedStrategy:
    """Per-device probability mass functions over CPU counts 0..budget"""

    pmfs: np.ndarray
    budget: int

    def __post_init__(self):
        pmfs = np.array(self.pmfs, dtype=float)
        if pmfs.ndim != 2:
            raise DimensionMismatchError(f"strategy must be a 2-D array, got shape {pmfs.shape}")
        if np.any(pmfs < 0):
            raise ValueError("strategy has negative probabilities")
        sums = pmfs.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > config.PMF_TOLERANCE):
            raise ValueError(f"strategy rows must sum to 1, got {sums.tolist()}")
        pmfs.setflags(write=False)
        object.__setattr__(self, 'pmfs', pmfs)

    @property
    def devices(self) -> int:
        return self.pmfs.shape[0]

    @property
    def support_size(self) -> int:
        return self.pmfs.shape[1]

    def row(self, device: int) -> np.ndarray:
        return self.pmfs[device]

    @classmethod
    def atom(cls, counts: Sequence[int], budget: int, width: Optional[int] = None) -> 'MixedStrategy':
        """Deterministic strategy placing all mass on the given allocation"""
        counts = [int(c) for c in counts]
        width = max(budget, max(counts, default=0)) + 1 if width is None else width
        pmfs = np.zeros((len(counts), width))
        pmfs[np.arange(len(counts)), counts] = 1.0
        return cls(pmfs, budget)


@dataclass(frozen=True)
class NeAnalysis:
    """Closed-form equilibrium and its exact expected performance"""

    defender_strategy: MixedStrategy
    attacker_strategy: MixedStrategy
    expected_protection: float
    expected_utility_defender: float
    regime: str


def symmetric_ne(game: GameConfig, B: DataSizeVector) -> MixedStrategy:
    """
    Equilibrium marginal of the symmetric game (S_M = S_N)

    Row i is uniform over {0, ..., floor(beta * B_i)} with beta = 2 S_M / B_total.
    Both players use the same strategy.
    """
    weights = _weights(B)
    if game.defense_budget != game.attack_budget:
        raise RegimeInapplicableError(
            f"symmetric regime inapplicable: S_M={game.defense_budget} != S_N={game.attack_budget}"
        )
    if weights.size != game.devices:
        raise DimensionMismatchError(f"data has {weights.size} entries, game has {game.devices} devices")
    total = float(weights.sum())
    if total <= 0:
        raise RegimeInapplicableError("symmetric regime inapplicable: total data size is zero")
    for i, b in enumerate(weights):
        others = total - b
        if b > others + 1e-12:
            raise RegimeInapplicableError(
                f"symmetric regime inapplicable: device {i} dominates (B_i={b} > sum of others {others})"
            )

    beta = 2.0 * game.defense_budget / total
    width = game.defense_budget + 1
    pmfs = np.zeros((game.devices, width))
    for i, b in enumerate(weights):
        top = min(floor(beta * b + 1e-9), game.defense_budget)
        pmfs[i, :top + 1] = 1.0 / (top + 1)
    return MixedStrategy(pmfs, game.defense_budget)


def check_asymmetric_regime(game: GameConfig) -> None:
    ratio = game.attack_budget / game.defense_budget
    if game.devices < 3:
        raise RegimeInapplicableError(f"asymmetric regime inapplicable: D={game.devices} < 3")
    if ratio < 2.0 / game.devices:
        raise RegimeInapplicableError(
            f"asymmetric regime inapplicable: S_N/S_M={ratio:.6g} < 2/D={2.0 / game.devices:.6g}"
        )
    if ratio > 1.0:
        raise RegimeInapplicableError(f"asymmetric regime inapplicable: S_N/S_M={ratio:.6g} > 1")


def asymmetric_defender_marginal(game: GameConfig) -> MixedStrategy:
    """Defender rows uniform over {1, ..., F} with F = floor(2 S_M / D), zero mass at 0"""
    f = (2 * game.defense_budget) // game.devices
    if f < 1:
        raise RegimeInapplicableError(
            f"asymmetric regime inapplicable: F=floor(2*{game.defense_budget}/{game.devices}) = 0"
        )
    width = max(game.defense_budget, f) + 1
    pmfs = np.zeros((game.devices, width))
    pmfs[:, 1:f + 1] = 1.0 / f
    return MixedStrategy(pmfs, game.defense_budget)


def asymmetric_ne(game: GameConfig) -> Tuple[MixedStrategy, MixedStrategy]:
    """
    Equilibrium marginals of the asymmetric game with equal data sizes

    Returns:
        (defender strategy, attacker strategy)
    """
    check_asymmetric_regime(game)
    defender = asymmetric_defender_marginal(game)
    f = (2 * game.defense_budget) // game.devices
    ratio = game.attack_budget / game.defense_budget

    width = max(game.attack_budget, f) + 1
    pmfs = np.zeros((game.devices, width))
    pmfs[:, 0] = 1.0 - ratio
    pmfs[:, 1:f + 1] = ratio / f
    attacker = MixedStrategy(pmfs, game.attack_budget)
    return defender, attacker


def expected_sign_exact(p: Sequence[float], q: Sequence[float]) -> float:
    """Exact E[sgn(M - N)] for independent M ~ p and N ~ q over 0, 1, 2, ..."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    signs = np.sign(np.subtract.outer(np.arange(p.size), np.arange(q.size)))
    return float(p @ signs @ q)


def expected_protection_exact(x: MixedStrategy, y: MixedStrategy, B: Weights) -> float:
    """Expected protection level of defender marginals x against attacker marginals y"""
    weights = _weights(B)
    if x.devices != y.devices or weights.size != x.devices:
        raise DimensionMismatchError(
            f"strategies have {x.devices}/{y.devices} devices, data has {weights.size}"
        )
    total = float(weights.sum())
    if total <= 0:
        raise EmptyStorageError("empty storage: total data size is zero")
    value = sum(float(b) * expected_sign_exact(x.row(i), y.row(i)) for i, b in enumerate(weights))
    return value / total


def ne_analysis(game: GameConfig, B: Optional[DataSizeVector] = None,
                regime: str = ASYMMETRIC) -> NeAnalysis:
    """
    Closed-form equilibrium with exact expected protection and utility

    Args:
        game: Game parameters
        B: Data sizes (asymmetric regime defaults to the top level on every device)
        regime: 'symmetric' or 'asymmetric'
    """
    if B is None:
        B = DataSizeVector(tuple([game.quant_levels] * game.devices), game.quant_levels)
    if regime == SYMMETRIC:
        x = symmetric_ne(game, B)
        y = x
    elif regime == ASYMMETRIC:
        if len(set(B.ticks)) != 1:
            raise RegimeInapplicableError("asymmetric regime inapplicable: data sizes differ across devices")
        x, y = asymmetric_ne(game)
    else:
        raise ValueError(f"unknown regime {regime!r}")
    protection = expected_protection_exact(x, y, B)
    return NeAnalysis(
        defender_strategy=x,
        attacker_strategy=y,
        expected_protection=protection,
        expected_utility_defender=protection * B.total,
        regime=regime,
    )


def analytic_utility_defender(game: GameConfig, B: DataSizeVector, regime: str) -> float:
    """Equilibrium defender utility in closed form: 0 (symmetric) or B_total (1 - S_N/S_M)"""
    if regime == SYMMETRIC:
        return 0.0
    return B.total * (1.0 - game.attack_budget / game.defense_budget)


def sample_marginal(s: MixedStrategy, rng: np.random.Generator) -> Allocation:
    """Independent per-device draws; the result may exceed the budget"""
    cdf = np.cumsum(s.pmfs, axis=1)
    u = rng.random(s.devices)
    counts = [min(int(np.searchsorted(cdf[i], u[i] * cdf[i, -1], side='right')), s.support_size - 1)
              for i in range(s.devices)]
    return Allocation(tuple(counts), s.budget, analysis_only=True)


def sample_feasible(s: MixedStrategy, budget: int, rng: np.random.Generator,
                    attempts: Optional[int] = None) -> Allocation:
    """
    Rejection-sample the marginals until the draw fits the budget

    After the attempts are exhausted the last draw is rescaled by budget / total
    and floored entrywise.
    """
    attempts = config.FEASIBLE_ATTEMPTS if attempts is None else attempts
    draw = None
    for _ in range(attempts):
        draw = sample_marginal(s, rng)
        if draw.total <= budget:
            return Allocation(draw.counts, budget)
    scale = budget / draw.total
    counts = tuple(int(floor(c * scale)) for c in draw.counts)
    logger.warning(f"sample_feasible fell back to rescaling {draw.counts} -> {counts}")
    return Allocation(counts, budget)


def device_gains(opponent: MixedStrategy, B: Weights, budget: int) -> np.ndarray:
    """gains[i, m] = B_i * E[sgn(m - N_i)] for m in 0..budget"""
    weights = _weights(B)
    if weights.size != opponent.devices:
        raise DimensionMismatchError(f"data has {weights.size} entries, opponent has {opponent.devices} devices")
    own = np.arange(budget + 1)
    theirs = np.arange(opponent.support_size)
    signs = np.sign(np.subtract.outer(own, theirs))
    return weights[:, None] * (opponent.pmfs @ signs.T)


def best_response_oracle(opponent: MixedStrategy, B: Weights, budget: int, granularity: int = 1,
                         cap: Optional[int] = None) -> Tuple[Allocation, float]:
    """
    Exhaustive best response against independent opponent marginals

    Returns:
        (lexicographically smallest maximizing allocation, its exact expected utility)
    """
    actions = enumerate_actions(budget, opponent.devices, granularity, cap)
    gains = device_gains(opponent, B, budget)
    matrix = action_matrix(actions)
    values = gains[np.arange(opponent.devices)[None, :], matrix].sum(axis=1)
    best = float(values.max())
    index = int(np.flatnonzero(values >= best - 1e-12)[0])
    return actions[index], float(values[index])
