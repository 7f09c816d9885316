"""
Tabular defenders: Q-learning, policy hill-climbing and hotbooting PHC
"""

import copy
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Hashable, Iterator, Optional, Tuple, Union

import numpy as np

from .. import config
from ..environment.storage_env import CloudStorageEnv, GameState, SlotRecord
from ..errors import GameConfigError
from ..game.core import GameConfig
from .base import Defender, run_defense

logger = logging.getLogger(__name__)

Q_LEARNING = 'q'
PHC = 'phc'
HOTBOOT_PHC = 'hotboot-phc'

ScenarioSampler = Callable[[int], CloudStorageEnv]


@dataclass(frozen=True)
class LearnerConfig:
    """Hyperparameters of the tabular learners"""

    alpha: float = config.ALPHA
    gamma: float = config.GAMMA
    delta: float = config.DELTA
    epsilon: float = config.EPSILON
    hotboot_runs: int = config.HOTBOOT_RUNS
    hotboot_slots: int = config.HOTBOOT_SLOTS

    def __post_init__(self):
        if not 0 <= self.alpha <= 1:
            raise GameConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0 <= self.gamma <= 1:
            raise GameConfigError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not 0 < self.delta <= 1:
            raise GameConfigError(f"delta must lie in (0, 1], got {self.delta}")
        if not 0 <= self.epsilon <= 1:
            raise GameConfigError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.hotboot_runs < 0 or self.hotboot_slots < 0:
            raise GameConfigError("hotboot_runs and hotboot_slots must be nonnegative")


class QTable:
    """Q-values per state over the defense action set; unseen entries are 0"""

    def __init__(self, action_count: int):
        self.action_count = action_count
        self.rows: Dict[Hashable, np.ndarray] = {}

    def row(self, key: Hashable) -> np.ndarray:
        values = self.rows.get(key)
        if values is None:
            values = np.zeros(self.action_count)
            self.rows[key] = values
        return values

    def peek(self, key: Hashable) -> np.ndarray:
        """Read-only view that does not create the state"""
        values = self.rows.get(key)
        return np.zeros(self.action_count) if values is None else values

    def value(self, key: Hashable) -> float:
        return float(self.peek(key).max())

    def greedy(self, key: Hashable) -> int:
        """Argmax with first-index tie-break"""
        return int(np.argmax(self.peek(key)))

    def __len__(self) -> int:
        return len(self.rows)

    def copy(self) -> 'QTable':
        return copy.deepcopy(self)


class PolicyTable:
    """Mixed strategy per state; unseen states are uniform"""

    def __init__(self, action_count: int):
        self.action_count = action_count
        self.rows: Dict[Hashable, np.ndarray] = {}

    def row(self, key: Hashable) -> np.ndarray:
        pmf = self.rows.get(key)
        if pmf is None:
            pmf = np.full(self.action_count, 1.0 / self.action_count)
            self.rows[key] = pmf
        return pmf

    def __len__(self) -> int:
        return len(self.rows)

    def copy(self) -> 'PolicyTable':
        return copy.deepcopy(self)


def _key(state: Union[GameState, Hashable]) -> Hashable:
    return state.key() if isinstance(state, GameState) else state


def q_update(table: QTable, s: GameState, a: int, reward: float, s_next: GameState,
             cfg: LearnerConfig) -> None:
    """Q(s,a) <- (1 - alpha) Q(s,a) + alpha (reward + gamma V(s'))"""
    row = table.row(_key(s))
    target = reward + cfg.gamma * table.value(_key(s_next))
    row[a] = (1.0 - cfg.alpha) * row[a] + cfg.alpha * target


def phc_policy_update(policy: PolicyTable, table: QTable, s: GameState, cfg: LearnerConfig) -> None:
    """Move delta of mass onto the Q-greedy action, then project back onto the simplex"""
    n = policy.action_count
    if n == 1:
        return
    key = _key(s)
    pmf = policy.row(key)
    best = table.greedy(key)
    step = cfg.delta / (n - 1)
    pmf -= step
    pmf[best] += step + cfg.delta
    np.clip(pmf, 0.0, None, out=pmf)
    pmf /= pmf.sum()


def _sample(pmf: np.ndarray, rng: np.random.Generator) -> int:
    cdf = np.cumsum(pmf)
    return min(int(np.searchsorted(cdf, rng.random() * cdf[-1], side='right')), pmf.size - 1)


def phc_select_action(policy: PolicyTable, s: GameState, rng: np.random.Generator) -> int:
    """Index of an action drawn from the state's mixed strategy"""
    return _sample(policy.row(_key(s)), rng)


class QDefender(Defender):
    """Epsilon-greedy Q-learning defender"""

    kind = Q_LEARNING

    def __init__(self, game: GameConfig, cfg: LearnerConfig = LearnerConfig(),
                 table: Optional[QTable] = None):
        super().__init__(game)
        self.cfg = cfg
        self.q = table.copy() if table is not None else QTable(self.action_count)

    def act(self, state, rng):
        if rng.random() < self.cfg.epsilon:
            return self.actions[int(rng.integers(self.action_count))]
        return self.actions[self.q.greedy(state.key())]

    def update(self, record, next_state, rng):
        q_update(self.q, record.state_before, self.index(record.defense),
                 record.outcome.utility_defender, next_state, self.cfg)


class PhcDefender(Defender):
    """Policy hill-climbing defender, optionally warm-started from hotbooted tables"""

    kind = PHC

    def __init__(self, game: GameConfig, cfg: LearnerConfig = LearnerConfig(),
                 warm: Optional[Tuple[QTable, PolicyTable]] = None):
        super().__init__(game)
        self.cfg = cfg
        if warm is not None:
            q, policy = warm
            if q.action_count != self.action_count or policy.action_count != self.action_count:
                raise GameConfigError(
                    f"warm tables cover {q.action_count} actions, game has {self.action_count}"
                )
            self.q, self.policy = q.copy(), policy.copy()
        else:
            self.q, self.policy = QTable(self.action_count), PolicyTable(self.action_count)

    @property
    def tables(self) -> Tuple[QTable, PolicyTable]:
        return self.q, self.policy

    def act(self, state, rng):
        return self.actions[phc_select_action(self.policy, state, rng)]

    def update(self, record, next_state, rng):
        q_update(self.q, record.state_before, self.index(record.defense),
                 record.outcome.utility_defender, next_state, self.cfg)
        phc_policy_update(self.policy, self.q, record.state_before, self.cfg)


def run_phc_defense(env: CloudStorageEnv, cfg: LearnerConfig, horizon: int, rng: np.random.Generator,
                    warm: Optional[Tuple[QTable, PolicyTable]] = None) -> Iterator[SlotRecord]:
    """PHC defense against the environment; warm tables are copied, never mutated"""
    return run_defense(env, PhcDefender(env.game, cfg, warm), horizon, rng)


def run_q_defense(env: CloudStorageEnv, cfg: LearnerConfig, horizon: int,
                  rng: np.random.Generator) -> Iterator[SlotRecord]:
    return run_defense(env, QDefender(env.game, cfg), horizon, rng)


def hotboot_phc(game: GameConfig, cfg: LearnerConfig, scenario_sampler: ScenarioSampler,
                rng: np.random.Generator) -> Tuple[QTable, PolicyTable]:
    """
    Train one shared (Q, pi) pair over emulated similar scenarios

    Args:
        game: Game parameters shared by every emulated scenario
        cfg: Learner settings (hotboot_runs scenarios of hotboot_slots slots)
        scenario_sampler: Builds the environment for emulated run i
        rng: Defender random source

    Returns:
        (Q table, policy table) to warm-start a live run
    """
    if cfg.hotboot_runs < 1 or cfg.hotboot_slots < 1:
        raise GameConfigError(
            f"hotbooting needs at least one run and one slot, got "
            f"{cfg.hotboot_runs} runs of {cfg.hotboot_slots} slots"
        )
    defender = PhcDefender(game, cfg)
    for run in range(cfg.hotboot_runs):
        env = scenario_sampler(run)
        total = sum(r.outcome.protection_level for r in run_defense(env, defender, cfg.hotboot_slots, rng))
        logger.info(f"Hotboot PHC run {run + 1}/{cfg.hotboot_runs}: mean R {total / cfg.hotboot_slots:.4f}")
    logger.info(f"Hotbooted PHC tables cover {len(defender.q)} states")
    return defender.tables
