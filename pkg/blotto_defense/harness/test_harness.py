"""
Checks for scenarios, artifacts, the seed runner and sweeps.

Tests:
1. Scenario files: values, ranges, events, comments and line-numbered errors
2. Presets: granularity fits and the growing-data schedule
3. Equilibrium tables for the closed-form examples
4. Runner: empty horizon, byte-identical reruns, seed permutation, CSV round-trip
5. Artifacts: exact reloads and config hash guards
6. Sweeps: rows per value, empty and failing points
7. Results store round-trip
8. Allocation decision timing and package discovery
"""

import logging
import sys
import tempfile
from dataclasses import replace
from pathlib import Path
from typing import Dict

import numpy as np
from setuptools import find_packages

import blotto_defense

from ..agents import DqnConfig, LearnerConfig, PolicyTable, QTable, init_params
from ..database import ResultsStore
from ..errors import (
    ArtifactMismatchError,
    RegimeInapplicableError,
    ScenarioParseError,
    SimulationError,
    SweepError,
)
from ..game.core import GameConfig
from ..utils import collect_tests, run_checks
from .analysis import analyze_point, marginal_table, ne_sweep
from .artifacts import load_network, load_tables, save_network, save_tables
from .runner import hotboot, load_seed_series, run_scenario, run_seed, run_sweep, write_report
from .scenario import PRESETS, get_preset, parse_scenario

logger = logging.getLogger(__name__)

SCENARIO_TEXT = """
# three devices, quick run
name=toy
devices=3
defense_budget=6
attack_budget=2
initial=0.5            # same size everywhere
event=100:*2
event=200:=0.1,0.2,0.3
attacker=static-uniform
defender=q
horizon=50
seeds=0-2,7
alpha=0.5
gamma=0.25
dqn_window=4
"""

SMALL_DQN = DqnConfig(window=2, minibatch=4, replay_capacity=100, conv1_filters=2, conv2_filters=2,
                      hidden_units=8, hotboot_runs=2, hotboot_slots=20)
SMALL_LEARNER = LearnerConfig(hotboot_runs=2, hotboot_slots=30)


def _quick(defender='q', horizon=60, seeds=(0, 1, 2), **changes):
    return replace(get_preset('fig4-reduced'), name=f"quick-{defender}", defender=defender, horizon=horizon,
                   seeds=seeds, window=20, learner=SMALL_LEARNER, dqn=SMALL_DQN, **changes)


def _wall_clock(path):
    return path.name.endswith('.timing.csv')


def _expect(error, call, *args, **kwargs):
    try:
        call(*args, **kwargs)
    except error as e:
        return e
    raise AssertionError(f"expected {error.__name__}")


def test_parse_scenario_values():
    scenario = parse_scenario(SCENARIO_TEXT)
    assert scenario.name == 'toy'
    assert scenario.seeds == (0, 1, 2, 7)
    assert scenario.learner.alpha == 0.5 and scenario.learner.gamma == 0.25
    assert scenario.dqn.gamma == 0.25 and scenario.dqn.window == 4
    schedule = scenario.schedule()
    assert schedule.data_at(1).ticks == (5, 5, 5)
    assert schedule.data_at(100).ticks == (10, 10, 10)
    assert schedule.data_at(200).ticks == (1, 2, 3)


def test_parse_errors_name_the_line():
    text = "devices=3\ndefense_budget=6\ncolour=red\nattack_budget=2\n"
    error = _expect(ScenarioParseError, parse_scenario, text, 'bad.scn')
    assert 'bad.scn:3' in str(error) and 'colour' in str(error)

    error = _expect(ScenarioParseError, parse_scenario, "devices=three\n")
    assert ':1:' in str(error)
    error = _expect(ScenarioParseError, parse_scenario, "devices=3\nevent=5:+2\n")
    assert ':2:' in str(error)
    _expect(ScenarioParseError, parse_scenario, "devices=3\ndefense_budget=6\n")
    _expect(ScenarioParseError, parse_scenario, "devices=3\ndefense_budget=6\nattack_budget=2\ndefender=oracle\n")


def test_scenario_text_round_trip():
    for name, preset in PRESETS.items():
        assert parse_scenario(preset.to_text(), name) == preset, name
    network = DqnConfig(gamma=0.25, window=2, minibatch=4, replay_capacity=100, conv1_filters=2,
                        conv2_filters=2, hidden_units=8, relu_output=True)
    custom = replace(parse_scenario(SCENARIO_TEXT), dqn=network)
    assert parse_scenario(custom.to_text()) == custom


def test_preset_granularity():
    assert get_preset('fig4').game.granularity == 2
    assert get_preset('fig4').game.defense_action_count == 3003
    assert get_preset('fig5').game.granularity == 1
    assert get_preset('fig4-reduced').game.defense_action_count == 84
    assert get_preset('fig7').with_value('devices', 6).game.granularity == 2
    _expect(ScenarioParseError, get_preset, 'fig99')


def test_fig5_schedule():
    schedule = get_preset('fig5').schedule()
    assert schedule.data_at(999).ticks == (6, 6, 6)
    assert schedule.data_at(1000).ticks == (7, 7, 7)
    assert schedule.data_at(2000).ticks == (8, 8, 8)
    assert get_preset('fig5').attacker == 'induce-strike'


def test_sweep_presets_change_data():
    for name in ('fig6', 'fig7'):
        preset = get_preset(name)
        assert preset.compare == ('hotboot-dqn', 'hotboot-phc', 'q'), name
        starts = [start for start, _ in preset.schedule().phases()]
        assert starts == [1, 1000, 2000], name
    schedule = get_preset('fig7').with_value('devices', 5).schedule()
    assert schedule.data_at(1).ticks == (6,) * 5
    assert schedule.data_at(2000).ticks == (8,) * 5

    error = _expect(ScenarioParseError, parse_scenario, SCENARIO_TEXT + "compare=q,sarsa\n")
    assert 'sarsa' in str(error)


def test_ne_analysis_examples():
    analysis, _, _ = analyze_point('asym', 600, 150, 20)
    assert abs(analysis.expected_protection - 0.75) <= 1e-12
    analysis, _, _ = analyze_point('asym', 1200, 150, 20)
    assert abs(analysis.expected_protection - 0.875) <= 1e-12

    analysis, _, _ = analyze_point('sym', 6, 6, data=[1.0, 1.0, 1.0])
    assert abs(analysis.expected_protection) <= 1e-12
    table = marginal_table(analysis)
    assert len(table) == 3 * 5
    assert np.allclose(table['defender_p'], 0.2) and np.allclose(table['attacker_p'], 0.2)

    error = _expect(RegimeInapplicableError, analyze_point, 'asym', 16, 4, 3)
    assert 'asymmetric regime inapplicable' in str(error)


def test_ne_sweep_rows():
    table = ne_sweep('asym', (600, 900, 1200), 150, (20, 40))
    assert len(table) == 6
    assert np.allclose(table['expected_protection'], 1 - 150 / table['defense_budget'], atol=1e-12)
    assert np.allclose(table['expected_utility_defender'], table['analytic_utility_defender'], atol=1e-9)


def test_empty_horizon_writes_headers():
    report = run_scenario(_quick(horizon=0), max_workers=2, progress=False)
    with tempfile.TemporaryDirectory() as tmp:
        write_report(report, tmp)
        assert Path(tmp, 'quick-q.seed0.csv').read_text() == 'slot,R,uD\n'
        assert Path(tmp, 'quick-q.mean.csv').read_text() == 'slot,R,uD\n'
        assert Path(tmp, 'quick-q.plot.csv').read_text().startswith('slot,R_ma,uD_ma')


def test_reruns_are_byte_identical():
    scenario = _quick('phc')
    with tempfile.TemporaryDirectory() as first, tempfile.TemporaryDirectory() as second:
        a = [p for p in write_report(run_scenario(scenario, max_workers=3, progress=False), first)
             if not _wall_clock(p)]
        b = [p for p in write_report(run_scenario(scenario, max_workers=1, progress=False), second)
             if not _wall_clock(p)]
        assert [p.name for p in a] == [p.name for p in b]
        for x, y in zip(a, b):
            assert x.read_bytes() == y.read_bytes(), x.name


def test_seed_order_does_not_matter():
    forward = run_scenario(_quick(seeds=(0, 1, 2)), progress=False)
    backward = run_scenario(_quick(seeds=(2, 0, 1)), progress=False)
    assert forward.averaged().equals(backward.averaged())
    for seed in (0, 1, 2):
        assert forward.per_seed[seed].equals(backward.per_seed[seed])


def test_csv_round_trip_reproduces_summary():
    report = run_scenario(_quick('random'), progress=False)
    with tempfile.TemporaryDirectory() as tmp:
        write_report(report, tmp)
        series = [load_seed_series(Path(tmp, f"quick-random.seed{s}.csv")) for s in report.seeds]
    mean_r = np.mean(np.stack([s['R'].to_numpy() for s in series]), axis=0)
    summary = report.summary().set_index('seed')
    assert abs(mean_r.mean() - summary.loc['mean', 'mean_R']) <= 1e-12
    assert abs(mean_r[-20:].mean() - summary.loc['mean', 'tail_mean_R']) <= 1e-12
    assert np.allclose(report.averaged()['R'], mean_r, atol=1e-12, rtol=0)


def test_table_artifact_round_trip():
    scenario = _quick('hotboot-phc')
    q, pi = hotboot(scenario, np.random.SeedSequence(5))
    with tempfile.TemporaryDirectory() as tmp:
        path = save_tables(Path(tmp, 'warm.tables'), scenario.game, (q, pi))
        q2, pi2 = load_tables(path, scenario.game)
        assert set(q2.rows) == set(q.rows) and set(pi2.rows) == set(pi.rows)
        assert all(np.array_equal(q.rows[k], q2.rows[k]) for k in q.rows)
        assert all(np.array_equal(pi.rows[k], pi2.rows[k]) for k in pi.rows)

        other = GameConfig(4, 6, 2, 10)
        error = _expect(ArtifactMismatchError, load_tables, path, other)
        assert 'config hash mismatch' in str(error)


def test_network_artifact_round_trip():
    game = GameConfig(3, 6, 2, 10)
    params = init_params(SMALL_DQN.side(3), game.defense_action_count, np.random.default_rng(3),
                         conv1=2, conv2=2, hidden=8)
    with tempfile.TemporaryDirectory() as tmp:
        path = save_network(Path(tmp, 'warm.net'), game, SMALL_DQN, params)
        loaded = load_network(path, game, SMALL_DQN)
        assert all(np.array_equal(a, getattr(loaded, name)) for name, a in params.arrays())
        assert loaded.input_side == params.input_side and loaded.relu_output == params.relu_output
        _expect(ArtifactMismatchError, load_network, path, game, replace(SMALL_DQN, hidden_units=9))
        _expect(ArtifactMismatchError, load_network, path, GameConfig(4, 6, 2, 10), SMALL_DQN)


def test_hotboot_is_reproducible():
    scenario = _quick('hotboot-dqn')
    first = hotboot(scenario, np.random.SeedSequence(9))
    second = hotboot(scenario, np.random.SeedSequence(9))
    assert all(np.array_equal(a, getattr(second, name)) for name, a in first.arrays())


def test_warm_start_from_artifact():
    scenario = _quick('hotboot-phc', horizon=30, seeds=(0,))
    tables = hotboot(scenario, np.random.SeedSequence(1))
    with tempfile.TemporaryDirectory() as tmp:
        path = save_tables(Path(tmp, 'warm.tables'), scenario.game, tables)
        report = run_scenario(replace(scenario, warm_start=str(path)), progress=False)
        assert len(report.per_seed[0]) == 30

        mismatched = replace(scenario, devices=4, warm_start=str(path))
        _expect(ArtifactMismatchError, run_scenario, mismatched, progress=False)


def test_failing_seed_is_named():
    warm = (QTable(5), PolicyTable(5))
    error = _expect(SimulationError, run_seed, _quick('hotboot-phc'), 3, warm)
    assert 'seed 3' in str(error)


def test_sweep_rows_and_errors():
    base = replace(get_preset('fig6'), horizon=30, seeds=(0, 1), learner=SMALL_LEARNER, dqn=SMALL_DQN)
    summary, reports = run_sweep(base, progress=False)
    assert list(summary['value']) == [v for v in (12, 13, 14, 15, 16) for _ in range(3)]
    assert list(summary['defender'][:3]) == ['hotboot-dqn', 'hotboot-phc', 'q']
    assert (summary['slots'] == 30).all() and (summary['seeds'] == 2).all()
    assert (summary['mean_decision_ms'] >= 0).all()
    assert len(reports) == 15

    devices = replace(get_preset('fig7'), horizon=10, seeds=(0,))
    summary, _ = run_sweep(devices, values=(3, 4), defenders=('ne-marginal', 'random'), progress=False)
    assert list(zip(summary['value'], summary['defender'])) == [
        (3, 'ne-marginal'), (3, 'random'), (4, 'ne-marginal'), (4, 'random')]

    _expect(SweepError, run_sweep, base, values=())
    error = _expect(SweepError, run_sweep, base, 'devices', (3, 0))
    assert 'devices=0' in str(error)


def test_results_store_round_trip():
    report = run_scenario(_quick('random', horizon=25, seeds=(0, 1)), progress=False)
    with ResultsStore(':memory:') as store:
        assert store.store_report(report) == 50
        assert store.store_report(report) == 50
        counts = store.query("SELECT seed, COUNT(*) AS n FROM slot_metrics GROUP BY seed ORDER BY seed")
        assert counts['n'].tolist() == [25, 25]
        logged = store.query("SELECT status FROM run_log")
        assert (logged['status'] == 'SUCCESS').all() and len(logged) == 4
        stored = store.query("SELECT R FROM slot_metrics WHERE seed = 1 ORDER BY slot")
        assert np.array_equal(stored['R'].to_numpy(), report.per_seed[1]['R'].to_numpy())


def test_decision_timing_reported():
    report = run_scenario(_quick('dqn', horizon=25, seeds=(0, 1)), progress=False)
    timing = report.timing()
    assert list(timing.columns) == ['seed', 'slots', 'mean_decision_ms', 'max_decision_ms']
    assert list(timing['seed']) == ['0', '1', 'mean']
    assert list(timing['slots']) == [25, 25, 50]
    assert (timing['mean_decision_ms'] >= 0).all()
    assert (timing['max_decision_ms'] >= timing['mean_decision_ms']).all()
    with tempfile.TemporaryDirectory() as tmp:
        written = write_report(report, tmp)
        assert Path(tmp, 'quick-dqn.timing.csv') in written
        assert Path(tmp, 'quick-dqn.timing.csv').read_text().startswith('seed,slots,mean_decision_ms')


def test_package_is_discoverable():
    root = Path(__file__).resolve().parents[2]
    packages = set(find_packages(str(root), exclude=['examples', 'examples.*']))
    for name in ('blotto_defense', 'blotto_defense.game', 'blotto_defense.agents',
                 'blotto_defense.environment', 'blotto_defense.harness', 'blotto_defense.database',
                 'blotto_defense.utils', 'summarizers'):
        assert name in packages, name
    assert blotto_defense.get_preset('fig4-reduced').devices == 3
    assert all(hasattr(blotto_defense, name) for name in blotto_defense.__all__)


def run_all_tests() -> Dict[str, bool]:
    """Run all tests and return results."""
    return run_checks('harness', collect_tests(sys.modules[__name__]))


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO, format='%(levelname)s: %(message)s')
    run_all_tests()
