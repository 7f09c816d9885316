"""
DQN defender with experience replay and hotbooting
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Deque, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .. import config
from ..environment.storage_env import CloudStorageEnv, GameState, SlotRecord
from ..errors import GameConfigError, ReplayUnderfullError, ShapeMismatchError
from ..game.core import Allocation, DataSizeVector, GameConfig
from .base import Defender, run_defense
from .network import NetworkParams, backward, forward, forward_cached, init_params, input_side_for, sgd_step
from .tabular import ScenarioSampler

logger = logging.getLogger(__name__)

DQN = 'dqn'
HOTBOOT_DQN = 'hotboot-dqn'


@dataclass(frozen=True)
class DqnConfig:
    """Hyperparameters of the DQN defender"""

    gamma: float = config.GAMMA
    epsilon: float = config.EPSILON
    window: int = config.DQN_WINDOW
    minibatch: int = config.DQN_MINIBATCH
    replay_capacity: int = config.REPLAY_CAPACITY
    learning_rate: float = config.LEARNING_RATE
    hotboot_runs: int = config.HOTBOOT_RUNS
    hotboot_slots: int = config.HOTBOOT_SLOTS
    conv1_filters: int = config.CONV1_FILTERS
    conv2_filters: int = config.CONV2_FILTERS
    hidden_units: int = config.HIDDEN_UNITS
    input_side: Optional[int] = None
    relu_output: bool = False

    def __post_init__(self):
        if not 0 <= self.gamma <= 1:
            raise GameConfigError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not 0 <= self.epsilon <= 1:
            raise GameConfigError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.window < 1 or self.minibatch < 1:
            raise GameConfigError(f"window and minibatch must be >= 1, got W={self.window}, H={self.minibatch}")
        if self.replay_capacity < self.minibatch:
            raise GameConfigError(
                f"replay capacity {self.replay_capacity} is below the minibatch size {self.minibatch}"
            )
        if self.learning_rate < 0:
            raise GameConfigError(f"learning_rate must be >= 0, got {self.learning_rate}")

    def input_length(self, devices: int) -> int:
        return self.window * 3 * devices + 2 * devices

    def side(self, devices: int) -> int:
        return input_side_for(self.input_length(devices), self.input_side)


HistoryPair = Tuple[GameState, Allocation]


def empty_pair(game: GameConfig) -> HistoryPair:
    """All-zero (state, action) pair used before the first slot"""
    state = GameState(Allocation.zeros(game.devices, game.attack_budget),
                      DataSizeVector(tuple([0] * game.devices), game.quant_levels))
    return state, Allocation.zeros(game.devices, game.defense_budget)


def _state_features(state: GameState, game: GameConfig) -> List[float]:
    return [n / game.attack_budget for n in state.prev_attack.counts] + list(state.data.levels)


def build_input(history: Sequence[HistoryPair], current: GameState, game: GameConfig,
                cfg: DqnConfig) -> np.ndarray:
    """
    Square network input from the last W (state, action) pairs and the current state

    Attack counts are scaled by 1/S_N, defense counts by 1/S_M, data levels
    are used as-is; the flat vector is zero-padded and reshaped row-major.
    """
    if len(history) < cfg.window:
        raise ShapeMismatchError(f"history holds {len(history)} pairs, window needs {cfg.window}")
    values: List[float] = []
    for state, action in list(history)[-cfg.window:]:
        values.extend(_state_features(state, game))
        values.extend(m / game.defense_budget for m in action.counts)
    values.extend(_state_features(current, game))

    side = cfg.side(game.devices)
    tensor = np.zeros(side * side)
    tensor[:len(values)] = values
    return tensor.reshape(side, side)


class Transition(NamedTuple):
    phi: np.ndarray
    action: int
    reward: float
    phi_next: np.ndarray


class ReplayMemory:
    """FIFO ring buffer of transitions"""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._items: Deque[Transition] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._items)

    def push(self, transition: Transition) -> None:
        self._items.append(transition)

    def sample(self, size: int, rng: np.random.Generator) -> List[Transition]:
        """Uniform draw without replacement"""
        if len(self._items) < size:
            raise ReplayUnderfullError(f"replay memory holds {len(self._items)} transitions, minibatch needs {size}")
        indices = rng.choice(len(self._items), size=size, replace=False)
        return [self._items[int(i)] for i in indices]


def dqn_select_action(params: NetworkParams, phi: np.ndarray, epsilon: float,
                      rng: np.random.Generator) -> int:
    """Argmax with probability 1 - epsilon, otherwise uniform over the other actions"""
    best = int(np.argmax(forward(params, phi)))
    n = params.action_count
    if n == 1 or rng.random() >= epsilon:
        return best
    other = int(rng.integers(n - 1))
    return other if other < best else other + 1


def batch_targets(target_params: NetworkParams, batch: Sequence[Transition], gamma: float) -> np.ndarray:
    """G = reward + gamma * max Q(phi', .) under the snapshot parameters"""
    rewards = np.array([t.reward for t in batch])
    if gamma == 0:
        return rewards
    q_next = forward(target_params, np.stack([t.phi_next for t in batch]))
    return rewards + gamma * q_next.max(axis=1)


def batch_loss(params: NetworkParams, batch: Sequence[Transition], targets: np.ndarray) -> float:
    q = forward(params, np.stack([t.phi for t in batch]))
    chosen = q[np.arange(len(batch)), [t.action for t in batch]]
    return float(np.mean((targets - chosen) ** 2))


def train_batch(params: NetworkParams, batch: Sequence[Transition], targets: np.ndarray,
                learning_rate: float) -> NetworkParams:
    """One gradient step on the mean squared error of the chosen actions"""
    x = np.stack([t.phi for t in batch])
    actions = np.array([t.action for t in batch])
    rows = np.arange(len(batch))
    q, cache = forward_cached(params, x)
    dq = np.zeros_like(q)
    dq[rows, actions] = 2.0 * (q[rows, actions] - targets) / len(batch)
    return sgd_step(params, backward(params, x, dq, cache), learning_rate)


def train_minibatch(params: NetworkParams, memory: ReplayMemory, cfg: DqnConfig,
                    rng: np.random.Generator) -> NetworkParams:
    """Sample H transitions and take one step; targets use the parameters from before the step"""
    batch = memory.sample(cfg.minibatch, rng)
    targets = batch_targets(params, batch, cfg.gamma)
    return train_batch(params, batch, targets, cfg.learning_rate)


class DqnDefender(Defender):
    """
    Convolutional Q-network defender

    The first W slots of an episode are played uniformly at random, warm
    start or not; a warm start only sets the initial parameters. Training
    starts once the replay memory holds a minibatch.
    """

    kind = DQN

    def __init__(self, game: GameConfig, cfg: DqnConfig, rng: np.random.Generator,
                 warm: Optional[NetworkParams] = None):
        super().__init__(game)
        self.cfg = cfg
        side = cfg.side(game.devices)
        if warm is not None:
            if warm.input_side != side or warm.action_count != self.action_count:
                raise ShapeMismatchError(
                    f"warm network expects side {warm.input_side} and {warm.action_count} actions, "
                    f"game needs side {side} and {self.action_count}"
                )
            self.params = warm.copy()
        else:
            self.params = init_params(side, self.action_count, rng, cfg.conv1_filters, cfg.conv2_filters,
                                      cfg.hidden_units, cfg.relu_output)
        self.warm = warm is not None
        self.memory = ReplayMemory(cfg.replay_capacity)
        self.updates = 0
        self.reset_episode()

    def reset_episode(self) -> None:
        """Clear the observation window; replay memory and parameters are kept"""
        self.history: Deque[HistoryPair] = deque([empty_pair(self.game)] * self.cfg.window,
                                                 maxlen=self.cfg.window)
        self.played = 0
        self._phi: Optional[np.ndarray] = None

    def act(self, state, rng):
        self._phi = build_input(self.history, state, self.game, self.cfg)
        if self.played < self.cfg.window:
            index = int(rng.integers(self.action_count))
        else:
            index = dqn_select_action(self.params, self._phi, self.cfg.epsilon, rng)
        self.played += 1
        return self.actions[index]

    def update(self, record, next_state, rng):
        self.history.append((record.state_before, record.defense))
        phi = self._phi if self._phi is not None else build_input(self.history, record.state_before,
                                                                  self.game, self.cfg)
        phi_next = build_input(self.history, next_state, self.game, self.cfg)
        self.memory.push(Transition(phi, self.index(record.defense), record.outcome.utility_defender, phi_next))
        self._phi = None
        if len(self.memory) >= self.cfg.minibatch:
            self.params = train_minibatch(self.params, self.memory, self.cfg, rng)
            self.updates += 1


def run_dqn_defense(env: CloudStorageEnv, cfg: DqnConfig, horizon: int, rng: np.random.Generator,
                    warm: Optional[NetworkParams] = None) -> Iterator[SlotRecord]:
    return run_defense(env, DqnDefender(env.game, cfg, rng, warm), horizon, rng)


def hotboot_dqn(game: GameConfig, cfg: DqnConfig, scenario_sampler: ScenarioSampler,
                rng: np.random.Generator) -> NetworkParams:
    """
    Train network parameters over emulated similar scenarios

    Experiences accumulate across the emulated runs; only the final
    parameters are returned.
    """
    if cfg.hotboot_runs < 1 or cfg.hotboot_slots < 1:
        raise GameConfigError(
            f"hotbooting needs at least one run and one slot, got "
            f"{cfg.hotboot_runs} runs of {cfg.hotboot_slots} slots"
        )
    defender = DqnDefender(game, cfg, rng)
    for run in range(cfg.hotboot_runs):
        defender.reset_episode()
        env = scenario_sampler(run)
        total = sum(r.outcome.protection_level for r in run_defense(env, defender, cfg.hotboot_slots, rng))
        logger.info(f"Hotboot DQN run {run + 1}/{cfg.hotboot_runs}: mean R {total / cfg.hotboot_slots:.4f}, "
                    f"{defender.updates} updates")
    if not defender.params.is_finite():
        logger.warning("Hotbooted network has non-finite parameters")
    return defender.params
