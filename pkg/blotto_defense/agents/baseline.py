"""
Non-learning reference defenders: uniform random and equilibrium marginals
"""

import logging
from typing import Dict, Tuple

from ..errors import RegimeInapplicableError
from ..game.core import Allocation, GameConfig
from ..game.equilibrium import (
    MixedStrategy,
    asymmetric_defender_marginal,
    check_asymmetric_regime,
    sample_feasible,
    symmetric_ne,
)
from .base import Defender

logger = logging.getLogger(__name__)

RANDOM = 'random'
NE_MARGINAL = 'ne-marginal'


class RandomDefender(Defender):
    """Uniform draw from the defense action set"""

    kind = RANDOM

    def act(self, state, rng):
        return self.actions[int(rng.integers(self.action_count))]


class NeMarginalDefender(Defender):
    """
    Plays budget-feasible draws from the closed-form equilibrium marginals

    With equal budgets and no dominant device the symmetric equilibrium for
    the current data sizes is used; otherwise the asymmetric-form defender
    marginal, which is only an equilibrium when S_N/S_M lies in [2/D, 1].
    Draws are floored onto the granularity lattice.
    """

    kind = NE_MARGINAL

    def __init__(self, game: GameConfig):
        super().__init__(game)
        self._strategies: Dict[Tuple[int, ...], MixedStrategy] = {}
        self._fallback = None

    def _asymmetric(self) -> MixedStrategy:
        if self._fallback is None:
            try:
                check_asymmetric_regime(self.game)
            except RegimeInapplicableError as e:
                logger.warning(f"Extrapolating the asymmetric defender marginal: {e}")
            self._fallback = asymmetric_defender_marginal(self.game)
        return self._fallback

    def strategy(self, state) -> MixedStrategy:
        ticks = state.data.ticks
        strategy = self._strategies.get(ticks)
        if strategy is None:
            strategy = self._asymmetric()
            if self.game.defense_budget == self.game.attack_budget:
                try:
                    strategy = symmetric_ne(self.game, state.data)
                except RegimeInapplicableError as e:
                    logger.warning(f"Symmetric marginal unavailable for data {ticks}: {e}")
            self._strategies[ticks] = strategy
        return strategy

    def act(self, state, rng):
        draw = sample_feasible(self.strategy(state), self.game.defense_budget, rng)
        g = self.game.granularity
        return Allocation(tuple((c // g) * g for c in draw.counts), self.game.defense_budget)
