"""
Checks for the DQN defender.

Tests:
1. Input construction: side, zero history, value range, short history
2. Replay memory: FIFO capacity, underfull error, sampling uniformity
3. Epsilon-greedy selection masses
4. Minibatch training: zero rate, regression to a constant, descent
5. Bootstrap phase, determinism, warm starts and hotbooting
"""

import logging
import sys
from typing import Dict

import numpy as np

from ..environment.attackers import GreedyQ
from ..environment.storage_env import CloudStorageEnv, DataSchedule, GameState
from ..errors import ReplayUnderfullError, ShapeMismatchError
from ..game.core import DataSizeVector, GameConfig
from ..utils import collect_tests, run_checks
from .base import run_defense
from .dqn import (
    DqnConfig,
    DqnDefender,
    ReplayMemory,
    Transition,
    batch_loss,
    batch_targets,
    build_input,
    dqn_select_action,
    empty_pair,
    hotboot_dqn,
    train_batch,
    train_minibatch,
)
from .network import forward, init_params

logger = logging.getLogger(__name__)

GAME = GameConfig(devices=2, defense_budget=2, attack_budget=1, quant_levels=2)
SMALL = DqnConfig(window=2, minibatch=4, replay_capacity=200, conv1_filters=2, conv2_filters=2, hidden_units=8)


def _env(seed=0):
    return CloudStorageEnv(GAME, DataSchedule(DataSizeVector((1, 2), 2)), GreedyQ(GAME),
                           np.random.default_rng(seed))


def _random_pair(game, rng):
    attack = game.attack_actions()
    defense = game.defense_actions()
    state = GameState(attack[int(rng.integers(len(attack)))],
                      DataSizeVector(tuple(rng.integers(0, game.quant_levels + 1, game.devices).tolist()),
                                     game.quant_levels))
    return state, defense[int(rng.integers(len(defense)))]


def _transitions(params_side, rng, count, actions=6):
    return [Transition(rng.random((params_side, params_side)), int(rng.integers(actions)),
                       float(rng.normal()), rng.random((params_side, params_side))) for _ in range(count)]


def test_input_side_and_zero_history():
    game = GameConfig(devices=3, defense_budget=6, attack_budget=2, quant_levels=4)
    cfg = DqnConfig()
    assert cfg.input_length(3) == 114
    assert cfg.side(3) == 11
    history = [empty_pair(game)] * cfg.window
    phi = build_input(history, empty_pair(game)[0], game, cfg)
    assert phi.shape == (11, 11)
    assert not phi.any()


def test_input_range_and_determinism():
    game = GameConfig(devices=3, defense_budget=6, attack_budget=2, quant_levels=4)
    cfg = DqnConfig()
    rng = np.random.default_rng(1)
    for _ in range(200):
        history = [_random_pair(game, rng) for _ in range(cfg.window + 3)]
        current = _random_pair(game, rng)[0]
        phi = build_input(history, current, game, cfg)
        assert phi.min() >= 0.0 and phi.max() <= 1.0
        assert np.array_equal(phi, build_input(history, current, game, cfg))
        assert not phi.reshape(-1)[114:].any()


def test_input_rejects_short_history():
    try:
        build_input([empty_pair(GAME)], empty_pair(GAME)[0], GAME, SMALL)
    except ShapeMismatchError:
        pass
    else:
        raise AssertionError("expected a history shorter than the window to be rejected")


def test_input_side_override():
    cfg = DqnConfig(window=1, input_side=5)
    assert cfg.side(2) == 5
    try:
        DqnConfig(window=12, input_side=5).side(3)
    except ShapeMismatchError:
        pass
    else:
        raise AssertionError("expected a 5x5 input to be too small for W=12, D=3")


def test_replay_capacity_and_underfull():
    memory = ReplayMemory(3)
    rng = np.random.default_rng(2)
    for t in _transitions(4, rng, 5):
        memory.push(t)
    assert len(memory) == 3
    try:
        memory.sample(4, rng)
    except ReplayUnderfullError:
        pass
    else:
        raise AssertionError("expected an underfull memory to refuse a minibatch")


def test_replay_sampling_uniform():
    memory = ReplayMemory(100)
    for i in range(100):
        memory.push(Transition(np.zeros((3, 3)), i, 0.0, np.zeros((3, 3))))
    rng = np.random.default_rng(3)
    counts = np.zeros(100)
    for _ in range(10_000):
        batch = memory.sample(10, rng)
        assert len({t.action for t in batch}) == 10
        for t in batch:
            counts[t.action] += 1
    assert np.all(np.abs(counts / 100_000 - 0.01) <= 0.001)


def test_epsilon_greedy_masses():
    rng = np.random.default_rng(4)
    params = init_params(3, 6, rng, conv1=1, conv2=1, hidden=2)
    phi = rng.random((3, 3))
    best = int(np.argmax(forward(params, phi)))

    assert all(dqn_select_action(params, phi, 0.0, rng) == best for _ in range(200))
    never = [dqn_select_action(params, phi, 1.0, rng) for _ in range(6000)]
    assert best not in never
    others = np.bincount(never, minlength=6) / 6000
    assert np.all(np.abs(np.delete(others, best) - 0.2) <= 0.03)

    draws = np.array([dqn_select_action(params, phi, 0.1, rng) for _ in range(100_000)])
    assert abs(np.mean(draws == best) - 0.9) <= 0.01


def test_zero_learning_rate():
    rng = np.random.default_rng(5)
    cfg = DqnConfig(window=2, minibatch=4, replay_capacity=50, learning_rate=0.0,
                    conv1_filters=2, conv2_filters=2, hidden_units=8)
    params = init_params(4, 6, rng, conv1=2, conv2=2, hidden=8)
    memory = ReplayMemory(50)
    for t in _transitions(4, rng, 10):
        memory.push(t)
    updated = train_minibatch(params, memory, cfg, rng)
    assert all(np.array_equal(a, getattr(updated, name)) for name, a in params.arrays())


def test_regression_to_constant():
    rng = np.random.default_rng(6)
    cfg = DqnConfig(gamma=0.0, window=2, minibatch=4, replay_capacity=50,
                    conv1_filters=2, conv2_filters=2, hidden_units=8)
    params = init_params(4, 6, rng, conv1=2, conv2=2, hidden=8)
    transition = Transition(rng.random((4, 4)), 2, 0.75, rng.random((4, 4)))
    memory = ReplayMemory(50)
    for _ in range(4):
        memory.push(transition)
    targets = np.full(4, 0.75)
    losses = [batch_loss(params, [transition] * 4, targets)]
    for _ in range(200):
        params = train_minibatch(params, memory, cfg, rng)
        losses.append(batch_loss(params, [transition] * 4, targets))
    assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))
    assert losses[-1] < losses[0]


def test_descent_on_frozen_batch():
    rng = np.random.default_rng(7)
    params = init_params(4, 6, rng, conv1=2, conv2=2, hidden=8)
    batch = _transitions(4, rng, 16)
    targets = batch_targets(params, batch, 0.5)
    before = batch_loss(params, batch, targets)
    after = batch_loss(train_batch(params, batch, targets, 1e-3), batch, targets)
    assert after <= before


def test_bootstrap_phase():
    cfg = DqnConfig(window=12, minibatch=16, replay_capacity=100, conv1_filters=2, conv2_filters=2,
                    hidden_units=8)
    rng = np.random.default_rng(8)
    defender = DqnDefender(GAME, cfg, rng)
    records = list(run_defense(_env(), defender, 10, rng))
    assert len(records) == 10
    assert len(defender.memory) == 10
    assert defender.updates == 0


def _stream(seed):
    rng = np.random.default_rng(seed)
    defender = DqnDefender(GAME, SMALL, rng)
    return [(r.defense.counts, r.attack.counts, r.outcome.utility_defender)
            for r in run_defense(_env(seed), defender, 60, rng)], defender


def test_training_determinism():
    first, defender = _stream(9)
    second, _ = _stream(9)
    assert first == second
    assert defender.updates == 60 - SMALL.minibatch + 1


def test_warm_start():
    rng = np.random.default_rng(10)
    warm = init_params(SMALL.side(2), 6, rng, conv1=2, conv2=2, hidden=8)
    defender = DqnDefender(GAME, SMALL, rng, warm=warm)
    assert defender.warm
    assert all(np.array_equal(a, getattr(defender.params, name)) for name, a in warm.arrays())
    assert defender.params.fc1_w is not warm.fc1_w

    wrong = init_params(SMALL.side(2), 5, rng, conv1=2, conv2=2, hidden=8)
    try:
        DqnDefender(GAME, SMALL, rng, warm=wrong)
    except ShapeMismatchError:
        pass
    else:
        raise AssertionError("expected a warm network for another action set to be rejected")


def test_warm_start_keeps_random_phase():
    cfg = DqnConfig(window=3, minibatch=4, replay_capacity=200, conv1_filters=2, conv2_filters=2,
                    hidden_units=8, epsilon=0.0)
    warm = init_params(cfg.side(2), 6, np.random.default_rng(12), conv1=2, conv2=2, hidden=8)
    defender = DqnDefender(GAME, cfg, np.random.default_rng(13), warm=warm)
    state = _env().observe_state()

    rng = np.random.default_rng(14)
    expected = np.random.default_rng(14)
    for _ in range(cfg.window):
        played = defender.act(state, rng)
        assert defender.index(played) == int(expected.integers(defender.action_count))

    phi = build_input(defender.history, state, GAME, cfg)
    greedy = int(np.argmax(forward(defender.params, phi)))
    assert defender.index(defender.act(state, rng)) == greedy


def test_hotboot_dqn():
    cfg = DqnConfig(window=2, minibatch=4, replay_capacity=200, conv1_filters=2, conv2_filters=2,
                    hidden_units=8, hotboot_runs=1, hotboot_slots=2)
    params = hotboot_dqn(GAME, cfg, lambda run: _env(50 + run), np.random.default_rng(11))
    assert params.is_finite()

    cfg = DqnConfig(window=2, minibatch=4, replay_capacity=200, conv1_filters=2, conv2_filters=2,
                    hidden_units=8, hotboot_runs=3, hotboot_slots=40)
    params = hotboot_dqn(GAME, cfg, lambda run: _env(60 + run), np.random.default_rng(12))
    assert params.is_finite()
    assert params.action_count == GAME.defense_action_count


def run_all_tests() -> Dict[str, bool]:
    """Run all tests and return results."""
    return run_checks('dqn', collect_tests(sys.modules[__name__]))


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO, format='%(levelname)s: %(message)s')
    run_all_tests()
