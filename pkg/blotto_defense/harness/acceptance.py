"""
Long-running reproduction checks.

Checks:
1. Learning trend on the reduced 3-device setup: hotbooted DQN >= hotbooted PHC >= Q-learning
2. Robustness after scheduled strikes on the reduced growing-data setup
3. Hotbooting speeds up early learning for PHC and DQN
4. Mean protection grows with the defense budget for the equilibrium-marginal defender
5. Unopposed PHC learns to cover every device
6. PHC chooses allocations faster than the DQN defender

Run with `main.py self-test --slow`; each takes minutes.
"""

import logging
from dataclasses import replace
from typing import Dict

import numpy as np

from .. import config
from ..agents import LearnerConfig, run_phc_defense
from ..environment.attackers import IDLE
from ..utils import run_checks
from .runner import run_scenario, run_sweep
from .scenario import Scenario, get_preset

logger = logging.getLogger(__name__)

SEEDS = tuple(range(10))
TAIL_SLOTS = 500
AFTER_STRIKE_SLOTS = 200
EARLY_SLOTS = 500


def _with_defender(scenario: Scenario, defender: str, **changes) -> Scenario:
    return replace(scenario, name=f"{scenario.name}.{defender}", defender=defender, **changes)


def check_learning_trend():
    base = replace(get_preset('fig4-reduced'), granularity=1, horizon=3000, seeds=SEEDS)
    tails = {}
    for defender in ('hotboot-dqn', 'hotboot-phc', 'q'):
        report = run_scenario(_with_defender(base, defender), progress=False)
        tails[defender] = report.tail_mean('R', TAIL_SLOTS)
    logger.info(f"Mean R over the last {TAIL_SLOTS} slots: {tails}")
    assert tails['hotboot-dqn'] >= tails['hotboot-phc'] >= tails['q'], tails
    floor = 0.8 * (1 - base.attack_budget / base.defense_budget)
    assert tails['hotboot-dqn'] >= floor, f"{tails['hotboot-dqn']:.4f} < {floor:.4f}"


def check_strike_robustness():
    base = replace(get_preset('fig5-reduced'), horizon=3000, seeds=SEEDS)
    reports = {d: run_scenario(_with_defender(base, d), progress=False) for d in ('hotboot-dqn', 'q')}
    for strike in base.strike_slots:
        after = {d: r.window_mean(strike, AFTER_STRIKE_SLOTS) for d, r in reports.items()}
        logger.info(f"Mean R in the {AFTER_STRIKE_SLOTS} slots after the strike at {strike}: {after}")
        assert after['hotboot-dqn'] > after['q'], (strike, after)


def check_hotboot_benefit():
    base = replace(get_preset('fig4-reduced'), horizon=EARLY_SLOTS, seeds=SEEDS)
    for warm, cold in (('hotboot-phc', 'phc'), ('hotboot-dqn', 'dqn')):
        totals = {}
        for defender in (warm, cold):
            report = run_scenario(_with_defender(base, defender), progress=False)
            totals[defender] = float(report.averaged()['uD'].sum())
        logger.info(f"Cumulative defender utility over {EARLY_SLOTS} slots: {totals}")
        assert totals[warm] >= totals[cold], totals


def check_budget_sweep_monotone():
    base = replace(get_preset('fig6'), horizon=3000, seeds=SEEDS)
    summary, _ = run_sweep(base, defenders=('ne-marginal',), progress=False)
    means = summary['mean_R'].to_numpy()
    logger.info(f"Mean R by defense budget: {dict(zip(summary['value'], means.round(4)))}")
    assert np.all(np.diff(means) >= -1e-12), means


def check_unopposed_phc():
    scenario = replace(get_preset('fig4-reduced'), attacker=IDLE, seeds=(0,))
    env = scenario.make_env(np.random.default_rng(0))
    records = list(run_phc_defense(env, LearnerConfig(), 1000, np.random.default_rng(1)))
    tail = np.mean([r.outcome.protection_level for r in records[-100:]])
    assert tail >= 0.99, f"mean R over the last 100 slots is {tail:.4f}"


def check_decision_cost():
    base = replace(get_preset('fig4-reduced'), horizon=EARLY_SLOTS, seeds=(0, 1, 2))
    cost = {}
    for defender in ('phc', 'dqn'):
        report = run_scenario(_with_defender(base, defender), progress=False)
        cost[defender] = float(report.timing()['mean_decision_ms'].iloc[-1])
    logger.info(f"Mean decision time per slot (ms): {cost}")
    assert cost['phc'] < cost['dqn'], cost


SLOW_CHECKS = {
    'learning_trend': check_learning_trend,
    'strike_robustness': check_strike_robustness,
    'hotboot_benefit': check_hotboot_benefit,
    'budget_sweep_monotone': check_budget_sweep_monotone,
    'unopposed_phc': check_unopposed_phc,
    'decision_cost': check_decision_cost,
}


def run_slow_checks() -> Dict[str, bool]:
    """Run the long reproduction checks and return results."""
    logger.info(f"Slow checks use {config.MAX_WORKERS} worker threads per scenario")
    return run_checks('acceptance', SLOW_CHECKS)
