"""
Attacker policies for the cloud storage environment
"""

import logging
from abc import ABC, abstractmethod
from collections import Counter
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .. import config
from ..game.core import Allocation, DataSizeVector, GameConfig, SlotOutcome
from ..game.equilibrium import MixedStrategy, best_response_oracle

logger = logging.getLogger(__name__)

STATIC_UNIFORM = 'static-uniform'
GREEDY_Q = 'greedy-q'
INDUCE_AND_STRIKE = 'induce-strike'
IDLE = 'idle'
ATTACKER_KINDS = (STATIC_UNIFORM, GREEDY_Q, INDUCE_AND_STRIKE, IDLE)


class AttackerPolicy(ABC):
    """Chooses the attack allocation each slot and learns from the outcome"""

    kind: str = ''

    def __init__(self, game: GameConfig):
        self.game = game
        self.actions = game.attack_actions()
        self.index_of: Dict[tuple, int] = {a.counts: i for i, a in enumerate(self.actions)}

    @abstractmethod
    def act(self, slot: int, data: DataSizeVector, rng: np.random.Generator) -> Allocation:
        """Attack allocation for the slot"""

    def observe(self, slot: int, defense: Allocation, attack: Allocation, outcome: SlotOutcome) -> None:
        pass


class StaticUniform(AttackerPolicy):
    """Uniform draw from the attack action set every slot"""

    kind = STATIC_UNIFORM

    def act(self, slot, data, rng):
        return self.actions[int(rng.integers(len(self.actions)))]


class IdleAttacker(AttackerPolicy):
    """Never allocates a CPU; stands in for an attacker without budget"""

    kind = IDLE

    def act(self, slot, data, rng):
        return self.actions[0]


class GreedyQ(AttackerPolicy):
    """
    Tabular Q-learning attacker

    State is the defender's previous allocation; reward is the attacker's
    utility. Actions are epsilon-greedy with first-index tie-break.
    """

    kind = GREEDY_Q

    def __init__(self, game: GameConfig, alpha: float = config.ATTACKER_ALPHA,
                 gamma: float = config.ATTACKER_GAMMA, epsilon: float = config.ATTACKER_EPSILON):
        super().__init__(game)
        self.alpha = alpha
        self.gamma = gamma
        self.epsilon = epsilon
        self.q: Dict[tuple, np.ndarray] = {}
        self._state = tuple([0] * game.devices)
        self._last_action: Optional[int] = None

    def _row(self, state: tuple) -> np.ndarray:
        row = self.q.get(state)
        if row is None:
            row = np.zeros(len(self.actions))
            self.q[state] = row
        return row

    def act(self, slot, data, rng):
        if rng.random() < self.epsilon:
            index = int(rng.integers(len(self.actions)))
        else:
            index = int(np.argmax(self._row(self._state)))
        self._last_action = index
        return self.actions[index]

    def observe(self, slot, defense, attack, outcome):
        index = self.index_of.get(attack.counts, self._last_action)
        next_state = defense.counts
        row = self._row(self._state)
        target = outcome.utility_attacker + self.gamma * float(self._row(next_state).max())
        row[index] = (1 - self.alpha) * row[index] + self.alpha * target
        self._state = next_state
        self._last_action = None


def modal_allocation(history: Sequence[Allocation]) -> Allocation:
    """Most frequent allocation; ties go to the one seen most recently"""
    if not history:
        raise ValueError("modal allocation of an empty history")
    counts = Counter(a.counts for a in history)
    best = max(counts.values())
    for allocation in reversed(history):
        if counts[allocation.counts] == best:
            return allocation
    raise AssertionError("unreachable")


def strike_best_response(history: Sequence[Allocation], window: int, data: DataSizeVector,
                         game: GameConfig, cap: Optional[int] = None) -> Allocation:
    """
    Attacker's exhaustive best response to the defender's modal recent allocation

    Args:
        history: Past defense allocations, oldest first
        window: Number of trailing slots to consider (<= 0 means the whole history)
        data: Current data sizes
        game: Game parameters (attack budget and granularity)
    """
    recent = list(history[-window:]) if window > 0 else list(history)
    if not recent:
        recent = list(history)
    modal = modal_allocation(recent)
    target = MixedStrategy.atom(modal.counts, game.defense_budget)
    response, value = best_response_oracle(target, data, game.attack_budget, game.granularity, cap)
    logger.debug(f"Strike against modal defense {modal.counts}: {response.counts} (value {value:.4g})")
    return response


class InduceAndStrike(GreedyQ):
    """
    Greedy Q-learning attacker that strikes on schedule

    At each strike slot it best-responds to the defender's modal allocation
    over the trailing window and keeps playing that response for
    `duration` slots before returning to its learned policy.
    """

    kind = INDUCE_AND_STRIKE

    def __init__(self, game: GameConfig, strike_slots: Iterable[int] = config.STRIKE_SLOTS,
                 window: int = config.STRIKE_WINDOW, duration: int = config.STRIKE_DURATION, **kwargs):
        super().__init__(game, **kwargs)
        self.strike_slots = frozenset(int(s) for s in strike_slots)
        self.window = window
        self.duration = max(int(duration), 1)
        self.history: List[Allocation] = []
        self._strike: Optional[Allocation] = None
        self._strike_until = 0

    def act(self, slot, data, rng):
        if slot in self.strike_slots and self.history:
            self._strike = strike_best_response(self.history, self.window, data, self.game)
            self._strike_until = slot + self.duration
            logger.info(f"Strike at slot {slot}: {self._strike.counts} until slot {self._strike_until - 1}")
        if self._strike is not None and slot < self._strike_until:
            self._last_action = self.index_of[self._strike.counts]
            return self._strike
        self._strike = None
        return super().act(slot, data, rng)

    def observe(self, slot, defense, attack, outcome):
        self.history.append(defense)
        if self.window > 0 and len(self.history) > self.window:
            del self.history[:-self.window]
        super().observe(slot, defense, attack, outcome)


def make_attacker(kind: str, game: GameConfig, **params) -> AttackerPolicy:
    """Build an attacker policy by kind name"""
    if kind == STATIC_UNIFORM:
        return StaticUniform(game)
    if kind == IDLE:
        return IdleAttacker(game)
    if kind == GREEDY_Q:
        return GreedyQ(game, **params)
    if kind == INDUCE_AND_STRIKE:
        return InduceAndStrike(game, **params)
    raise ValueError(f"unknown attacker kind {kind!r}; expected one of {', '.join(ATTACKER_KINDS)}")
