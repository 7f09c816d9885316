"""
Defender interface and the shared slot loop
"""

import logging
import time
from abc import ABC, abstractmethod
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from ..environment.storage_env import CloudStorageEnv, GameState, SlotRecord
from ..game.core import Allocation, GameConfig

logger = logging.getLogger(__name__)


class Defender(ABC):
    """Chooses the defense allocation each slot and learns from the revealed outcome"""

    kind: str = ''

    def __init__(self, game: GameConfig):
        self.game = game
        self.actions: List[Allocation] = game.defense_actions()
        self.index_of: Dict[Tuple[int, ...], int] = {a.counts: i for i, a in enumerate(self.actions)}

    @property
    def action_count(self) -> int:
        return len(self.actions)

    def index(self, action: Allocation) -> int:
        return self.index_of[action.counts]

    @abstractmethod
    def act(self, state: GameState, rng: np.random.Generator) -> Allocation:
        """Defense allocation for the current state"""

    def update(self, record: SlotRecord, next_state: GameState, rng: np.random.Generator) -> None:
        pass


def run_defense(env: CloudStorageEnv, defender: Defender, horizon: int, rng: np.random.Generator,
                decision_times: Optional[List[float]] = None) -> Iterator[SlotRecord]:
    """
    Play `horizon` slots: observe, act, step, learn

    Yields one SlotRecord per slot. When `decision_times` is given, the
    wall-clock seconds spent in each `act` call are appended to it.
    """
    for _ in range(max(horizon, 0)):
        state = env.observe_state()
        started = time.perf_counter()
        defense = defender.act(state, rng)
        if decision_times is not None:
            decision_times.append(time.perf_counter() - started)
        record = env.step(defense)
        defender.update(record, env.observe_state(), rng)
        yield record
