"""
Checks for the tabular defenders.

Tests:
1. Q update arithmetic at full, partial and zero learning rates
2. Policy hill-climbing step sizes, absorbing atoms and projection
3. Simplex preservation under fuzzed updates
4. Mixed-strategy sampling frequencies and lazy initialization
5. Run loops: empty horizon, warm tables left untouched, state accounting
6. Hotbooting PHC preconditions and outputs
"""

import logging
import sys
from typing import Dict

import numpy as np

from ..environment.attackers import GreedyQ, IdleAttacker, StaticUniform
from ..environment.storage_env import CloudStorageEnv, DataSchedule, GameState, ScheduleEvent
from ..errors import GameConfigError
from ..game.core import Allocation, DataSizeVector, GameConfig
from ..utils import collect_tests, run_checks
from .base import run_defense
from .tabular import (
    LearnerConfig,
    PolicyTable,
    QDefender,
    QTable,
    hotboot_phc,
    phc_policy_update,
    phc_select_action,
    q_update,
    run_phc_defense,
    run_q_defense,
)

logger = logging.getLogger(__name__)

GAME = GameConfig(devices=2, defense_budget=2, attack_budget=1, quant_levels=2)


def _state(prev=(0, 0), ticks=(1, 1)):
    return GameState(Allocation(prev, GAME.attack_budget), DataSizeVector(ticks, GAME.quant_levels))


def _env(attacker=None, seed=0, schedule=None):
    schedule = schedule or DataSchedule(DataSizeVector((1, 2), 2))
    return CloudStorageEnv(GAME, schedule, attacker or GreedyQ(GAME), np.random.default_rng(seed))


def test_q_update_arithmetic():
    s, s_next = _state(), _state((1, 0))
    table = QTable(6)
    q_update(table, s, 2, 0.75, s_next, LearnerConfig(alpha=1.0, gamma=0.0))
    assert table.row(s.key())[2] == 0.75

    table = QTable(6)
    q_update(table, s, 4, 2.0, s_next, LearnerConfig(alpha=0.9, gamma=0.5))
    assert abs(table.row(s.key())[4] - 1.8) <= 1e-12

    table.row(s.key())[1] = 0.3
    q_update(table, s, 1, 5.0, s_next, LearnerConfig(alpha=0.0))
    assert table.row(s.key())[1] == 0.3


def test_q_update_contracts_to_reward():
    s = _state()
    table = QTable(3)
    cfg = LearnerConfig(alpha=0.3, gamma=0.0)
    previous = abs(table.row(s.key())[0] - 1.5)
    for _ in range(50):
        q_update(table, s, 0, 1.5, s, cfg)
        gap = abs(table.row(s.key())[0] - 1.5)
        assert gap <= previous
        previous = gap
    assert previous < 1e-6


def test_phc_step_from_uniform():
    s = _state()
    table, policy = QTable(6), PolicyTable(6)
    table.row(s.key())[3] = 1.0
    phc_policy_update(policy, table, s, LearnerConfig(delta=0.02))
    pmf = policy.row(s.key())
    assert abs(pmf[3] - (1 / 6 + 0.02)) <= 1e-12
    for i in (0, 1, 2, 4, 5):
        assert abs(pmf[i] - (1 / 6 - 0.004)) <= 1e-12


def test_phc_atom_is_absorbing():
    s = _state()
    table, policy = QTable(6), PolicyTable(6)
    table.row(s.key())[2] = 1.0
    policy.rows[s.key()] = np.eye(6)[2]
    phc_policy_update(policy, table, s, LearnerConfig())
    assert np.array_equal(policy.row(s.key()), np.eye(6)[2])


def test_phc_projection():
    s = _state()
    table, policy = QTable(6), PolicyTable(6)
    table.row(s.key())[5] = 1.0
    policy.rows[s.key()] = np.array([0.001, 0.2, 0.2, 0.2, 0.2, 0.199])
    phc_policy_update(policy, table, s, LearnerConfig(delta=0.02))
    pmf = policy.row(s.key())
    assert pmf[0] == 0.0
    assert abs(pmf.sum() - 1.0) <= 1e-9
    assert pmf.min() >= 0.0


def test_phc_simplex_fuzz():
    rng = np.random.default_rng(12)
    table, policy = QTable(10), PolicyTable(10)
    states = [_state((a, b)) for a in range(2) for b in range(2) if a + b <= 1]
    for _ in range(10_000):
        s = states[int(rng.integers(len(states)))]
        table.row(s.key())[int(rng.integers(10))] = rng.normal()
        phc_policy_update(policy, table, s, LearnerConfig(delta=float(rng.uniform(0.001, 0.5))))
    for pmf in policy.rows.values():
        assert pmf.min() >= 0.0
        assert abs(pmf.sum() - 1.0) <= 1e-9


def test_phc_single_action_is_noop():
    s = _state()
    policy = PolicyTable(1)
    phc_policy_update(policy, QTable(1), s, LearnerConfig())
    assert policy.row(s.key())[0] == 1.0


def test_phc_select_action():
    rng = np.random.default_rng(21)
    s = _state()
    policy = PolicyTable(6)
    policy.rows[s.key()] = np.eye(6)[4]
    assert all(phc_select_action(policy, s, rng) == 4 for _ in range(100))

    fresh = PolicyTable(6)
    counts = np.bincount([phc_select_action(fresh, _state((1, 0)), rng) for _ in range(60_000)], minlength=6)
    assert np.all(np.abs(counts / 60_000 - 1 / 6) <= 0.01)
    assert np.allclose(fresh.row(_state((1, 0)).key()), 1 / 6)


def test_greedy_tie_break():
    table = QTable(6)
    assert table.greedy(_state().key()) == 0
    row = table.row(_state().key())
    row[[2, 4]] = 1.0
    assert table.greedy(_state().key()) == 2


def test_empty_horizon_leaves_tables():
    q, policy = QTable(6), PolicyTable(6)
    records = list(run_phc_defense(_env(), LearnerConfig(), 0, np.random.default_rng(0), warm=(q, policy)))
    assert records == []
    assert len(q) == 0 and len(policy) == 0


def test_warm_tables_are_copied():
    q, policy = QTable(6), PolicyTable(6)
    key = _state(ticks=(1, 2)).key()
    q.row(key)[5] = 1.0
    policy.rows[key] = np.eye(6)[5]
    records = list(run_phc_defense(_env(), LearnerConfig(), 200, np.random.default_rng(1), warm=(q, policy)))
    assert len(records) == 200
    assert records[0].defense.counts == GAME.defense_actions()[5].counts
    assert len(q) == 1 and q.row(key)[5] == 1.0
    assert np.array_equal(policy.rows[key], np.eye(6)[5])


def test_unopposed_phc_wins():
    records = list(run_phc_defense(_env(IdleAttacker(GAME)), LearnerConfig(), 1000, np.random.default_rng(3)))
    tail = [r.outcome.protection_level for r in records[-100:]]
    assert np.mean(tail) >= 0.3


def test_q_defender_exploration_modes():
    rng = np.random.default_rng(5)
    greedy = QDefender(GAME, LearnerConfig(epsilon=0.0))
    assert greedy.act(_state(), rng).counts == (0, 0)

    uniform = list(run_q_defense(_env(StaticUniform(GAME)), LearnerConfig(epsilon=1.0), 6000, rng))
    index = {a.counts: i for i, a in enumerate(GAME.defense_actions())}
    counts = np.bincount([index[r.defense.counts] for r in uniform], minlength=6)
    assert np.all(np.abs(counts / 6000 - 1 / 6) <= 0.03)


def test_state_space_bound():
    schedule = DataSchedule(DataSizeVector((1, 2), 2), [ScheduleEvent(300, replacement=(1.0, 0.5))])
    defender = QDefender(GAME)
    list(run_defense(_env(GreedyQ(GAME), 7, schedule), defender, 600, np.random.default_rng(7)))
    bound = GAME.attack_action_count * (GAME.quant_levels + 1) ** GAME.devices
    assert 0 < len(defender.q) <= bound


def test_hotboot_phc():
    base = DataSchedule(DataSizeVector((1, 2), 2), [ScheduleEvent(30, multipliers=(2.0, 0.5))])
    perturb_rng = np.random.default_rng(11)

    def sampler(run):
        return _env(GreedyQ(GAME), 100 + run, base.perturbed(perturb_rng))

    try:
        hotboot_phc(GAME, LearnerConfig(hotboot_runs=0), sampler, np.random.default_rng(0))
    except GameConfigError:
        pass
    else:
        raise AssertionError("expected zero hotboot runs to be rejected")

    q, policy = hotboot_phc(GAME, LearnerConfig(hotboot_runs=3, hotboot_slots=60), sampler,
                            np.random.default_rng(0))
    assert any(np.any(row != 0) for row in q.rows.values())
    for pmf in policy.rows.values():
        assert pmf.min() >= 0.0 and abs(pmf.sum() - 1.0) <= 1e-9


def test_learner_config_validation():
    try:
        LearnerConfig(gamma=1.5)
    except GameConfigError:
        return
    raise AssertionError("expected gamma outside [0, 1] to be rejected")


def run_all_tests() -> Dict[str, bool]:
    """Run all tests and return results."""
    return run_checks('tabular', collect_tests(sys.modules[__name__]))


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO, format='%(levelname)s: %(message)s')
    run_all_tests()
