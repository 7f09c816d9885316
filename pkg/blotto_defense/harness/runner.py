"""
Seed runner, metrics and sweeps
Runs a scenario over its seeds in parallel and collects per-slot metrics
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from .. import config
from ..agents import (
    DQN,
    HOTBOOT_DQN,
    HOTBOOT_PHC,
    NE_MARGINAL,
    PHC,
    Q_LEARNING,
    RANDOM,
    Defender,
    DqnDefender,
    NeMarginalDefender,
    PhcDefender,
    QDefender,
    RandomDefender,
    hotboot_dqn,
    hotboot_phc,
    run_defense,
)
from ..errors import BlottoError, GameConfigError, SimulationError, SweepError
from .artifacts import load_artifact
from .scenario import SWEEP_AXES, Scenario

logger = logging.getLogger(__name__)

SERIES_COLUMNS = ['slot', 'R', 'uD']
SUMMARY_COLUMNS = ['seed', 'slots', 'mean_R', 'mean_uD', 'tail_mean_R', 'tail_mean_uD']
SWEEP_COLUMNS = ['axis', 'value', 'defender', 'granularity', 'seeds', 'slots',
                 'mean_R', 'mean_uD', 'tail_mean_R', 'tail_mean_uD', 'mean_decision_ms']
TIMING_COLUMNS = ['seed', 'slots', 'mean_decision_ms', 'max_decision_ms']
HOTBOOT_KINDS = (HOTBOOT_PHC, HOTBOOT_DQN)
FLOAT_FORMAT = '%.17g'


def seed_streams(seed: int) -> Tuple[np.random.Generator, np.random.Generator, np.random.SeedSequence]:
    """Independent environment and defender generators plus the hotbooting seed sequence"""
    env_ss, defender_ss, hotboot_ss = np.random.SeedSequence(seed).spawn(3)
    return np.random.default_rng(env_ss), np.random.default_rng(defender_ss), hotboot_ss


def hotboot(scenario: Scenario, seed_sequence: np.random.SeedSequence):
    """Warm start for a hotbooting defender, trained on emulated similar scenarios"""
    if scenario.defender not in HOTBOOT_KINDS:
        raise GameConfigError(f"defender {scenario.defender!r} does not hotboot")
    rng = np.random.default_rng(seed_sequence.spawn(1)[0])
    sampler = scenario.scenario_sampler(seed_sequence)
    if scenario.defender == HOTBOOT_PHC:
        return hotboot_phc(scenario.game, scenario.learner, sampler, rng)
    return hotboot_dqn(scenario.game, scenario.dqn, sampler, rng)


def make_defender(scenario: Scenario, rng: np.random.Generator, warm=None) -> Defender:
    game = scenario.game
    kind = scenario.defender
    if kind == Q_LEARNING:
        return QDefender(game, scenario.learner)
    if kind in (PHC, HOTBOOT_PHC):
        return PhcDefender(game, scenario.learner, warm if kind == HOTBOOT_PHC else None)
    if kind in (DQN, HOTBOOT_DQN):
        return DqnDefender(game, scenario.dqn, rng, warm if kind == HOTBOOT_DQN else None)
    if kind == NE_MARGINAL:
        return NeMarginalDefender(game)
    if kind == RANDOM:
        return RandomDefender(game)
    raise GameConfigError(f"unknown defender {kind!r}")


class SeedRun(NamedTuple):
    series: pd.DataFrame
    decision_seconds: np.ndarray


def run_seed(scenario: Scenario, seed: int, warm=None) -> SeedRun:
    """
    One full run of the scenario at one seed

    Hotbooting defenders without a supplied warm start are hotbooted
    inline from this seed's own stream.

    Returns:
        SeedRun: the slot, R, uD series and the seconds each allocation decision took

    Raises:
        SimulationError: naming the seed and the slot that failed
    """
    env_rng, defender_rng, hotboot_ss = seed_streams(seed)
    try:
        if scenario.defender in HOTBOOT_KINDS and warm is None:
            warm = hotboot(scenario, hotboot_ss)
        env = scenario.make_env(env_rng)
        defender = make_defender(scenario, defender_rng, warm)
    except Exception as e:
        raise SimulationError(f"seed {seed}: setup failed: {e}") from e

    slots = np.zeros(scenario.horizon, dtype=np.int64)
    protection = np.zeros(scenario.horizon)
    utility = np.zeros(scenario.horizon)
    decision_times: List[float] = []
    try:
        for i, record in enumerate(run_defense(env, defender, scenario.horizon, defender_rng, decision_times)):
            slots[i] = record.slot
            protection[i] = record.outcome.protection_level
            utility[i] = record.outcome.utility_defender
    except Exception as e:
        raise SimulationError(f"seed {seed}, slot {env.slot}: {type(e).__name__}: {e}") from e
    series = pd.DataFrame({'slot': slots, 'R': protection, 'uD': utility}, columns=SERIES_COLUMNS)
    return SeedRun(series, np.asarray(decision_times, dtype=float))


def _summarize(frame: pd.DataFrame, window: int) -> dict:
    tail = frame.tail(window)
    return {
        'slots': len(frame),
        'mean_R': float(frame['R'].mean()) if len(frame) else np.nan,
        'mean_uD': float(frame['uD'].mean()) if len(frame) else np.nan,
        'tail_mean_R': float(tail['R'].mean()) if len(tail) else np.nan,
        'tail_mean_uD': float(tail['uD'].mean()) if len(tail) else np.nan,
    }


@dataclass
class MetricsReport:
    """Per-seed slot series of one scenario and the statistics derived from them"""

    scenario: str
    defender: str
    window: int
    per_seed: Dict[int, pd.DataFrame] = field(default_factory=dict)
    decision_seconds: Dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def seeds(self) -> List[int]:
        return sorted(self.per_seed)

    def averaged(self) -> pd.DataFrame:
        """Seed-averaged series; seeds are combined in sorted order"""
        if not self.per_seed:
            return pd.DataFrame(columns=SERIES_COLUMNS)
        frames = [self.per_seed[s] for s in self.seeds]
        return pd.DataFrame({
            'slot': frames[0]['slot'].to_numpy(),
            'R': np.mean(np.stack([f['R'].to_numpy() for f in frames]), axis=0),
            'uD': np.mean(np.stack([f['uD'].to_numpy() for f in frames]), axis=0),
        }, columns=SERIES_COLUMNS)

    def summary(self) -> pd.DataFrame:
        """One row per seed plus a 'mean' row over the seed-averaged series"""
        rows = [{'seed': str(s), **_summarize(self.per_seed[s], self.window)} for s in self.seeds]
        rows.append({'seed': 'mean', **_summarize(self.averaged(), self.window)})
        return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)

    def plot_data(self) -> pd.DataFrame:
        """Moving averages of the seed-averaged R and uD"""
        averaged = self.averaged()
        return pd.DataFrame({
            'slot': averaged['slot'],
            'R_ma': averaged['R'].astype(float).rolling(self.window, min_periods=1).mean(),
            'uD_ma': averaged['uD'].astype(float).rolling(self.window, min_periods=1).mean(),
        }, columns=['slot', 'R_ma', 'uD_ma'])

    def timing(self) -> pd.DataFrame:
        """Per-seed allocation decision time in milliseconds plus a 'mean' row over all slots"""
        def row(seed, seconds):
            ms = np.asarray(seconds, dtype=float) * 1e3
            return {'seed': seed, 'slots': len(ms),
                    'mean_decision_ms': float(ms.mean()) if len(ms) else np.nan,
                    'max_decision_ms': float(ms.max()) if len(ms) else np.nan}

        seeds = [s for s in self.seeds if s in self.decision_seconds]
        rows = [row(str(s), self.decision_seconds[s]) for s in seeds]
        pooled = np.concatenate([self.decision_seconds[s] for s in seeds]) if seeds else np.zeros(0)
        rows.append(row('mean', pooled))
        return pd.DataFrame(rows, columns=TIMING_COLUMNS)

    def tail_mean(self, column: str = 'R', slots: Optional[int] = None) -> float:
        return float(self.averaged()[column].tail(slots or self.window).mean())

    def window_mean(self, start: int, length: int, column: str = 'R') -> float:
        """Mean of the seed-averaged series over slots start .. start+length-1"""
        averaged = self.averaged()
        mask = (averaged['slot'] >= start) & (averaged['slot'] < start + length)
        return float(averaged.loc[mask, column].mean())


def write_report(report: MetricsReport, out_dir: Union[str, Path], plot_format: str = 'csv') -> List[Path]:
    """
    Write per-seed series, the seed average, the summary and the plot data

    Files are named <scenario>.seed<i>.csv, <scenario>.mean.csv,
    <scenario>.summary.csv, <scenario>.plot.csv (or .parquet) and
    <scenario>.timing.csv. Only the timing file depends on wall-clock time.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for seed in report.seeds:
        path = out_dir / f"{report.scenario}.seed{seed}.csv"
        report.per_seed[seed].to_csv(path, index=False, float_format=FLOAT_FORMAT)
        written.append(path)

    for suffix, frame in (('mean', report.averaged()), ('summary', report.summary())):
        path = out_dir / f"{report.scenario}.{suffix}.csv"
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
        written.append(path)

    plot = report.plot_data()
    if plot_format == 'parquet':
        path = out_dir / f"{report.scenario}.plot.parquet"
        plot.to_parquet(path, index=False)
    else:
        path = out_dir / f"{report.scenario}.plot.csv"
        plot.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    written.append(path)

    path = out_dir / f"{report.scenario}.timing.csv"
    report.timing().to_csv(path, index=False, float_format=FLOAT_FORMAT)
    written.append(path)
    logger.info(f"Wrote {len(written)} result files for {report.scenario} to {out_dir}")
    return written


def load_seed_series(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, dtype={'slot': np.int64, 'R': float, 'uD': float})


def run_scenario(scenario: Scenario, max_workers: int = config.MAX_WORKERS, warm=None,
                 progress: bool = True) -> MetricsReport:
    """
    Run every seed of the scenario in parallel

    A warm_start path in the scenario is loaded once and shared; otherwise
    hotbooting defenders hotboot per seed.

    Raises:
        SimulationError: if any seed fails; no partial report is returned
    """
    if warm is None and scenario.warm_start and scenario.defender in HOTBOOT_KINDS:
        warm = load_artifact(scenario.warm_start, scenario.defender, scenario.game, scenario.dqn)

    logger.info(f"Running {scenario.name}: {scenario.game.describe()}, defender {scenario.defender}, "
                f"attacker {scenario.attacker}, {len(scenario.seeds)} seeds x {scenario.horizon} slots")
    report = MetricsReport(scenario.name, scenario.defender, scenario.window)
    failures: List[SimulationError] = []

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = {executor.submit(run_seed, scenario, seed, warm): seed for seed in scenario.seeds}
        for future in tqdm(as_completed(futures), total=len(futures), desc=f"{scenario.name} seeds",
                           disable=not progress):
            seed = futures[future]
            try:
                run = future.result()
                report.per_seed[seed] = run.series
                report.decision_seconds[seed] = run.decision_seconds
            except SimulationError as e:
                logger.error(f"{scenario.name}: {e}")
                failures.append(e)

    if failures:
        raise SimulationError(f"{scenario.name}: {len(failures)} of {len(futures)} seeds failed; first: {failures[0]}")
    logger.info(f"Finished {scenario.name}: mean R {report.tail_mean('R', scenario.horizon):.4f} "
                f"over {scenario.horizon} slots")
    return report


def run_sweep(scenario: Scenario, axis: Optional[str] = None, values: Optional[Sequence[int]] = None,
              defenders: Optional[Iterable[str]] = None, max_workers: int = config.MAX_WORKERS,
              progress: bool = True) -> Tuple[pd.DataFrame, List[MetricsReport]]:
    """
    Run the scenario at each value of one parameter for each defender kind

    Args:
        axis: 'defense_budget' or 'devices'; defaults to the scenario's own sweep axis
        values: Parameter values; defaults to the scenario's own sweep values
        defenders: Defender kinds; defaults to the scenario's compare set, else its defender

    Returns:
        (summary with one row per value per defender, the underlying reports)

    Raises:
        SweepError: on an empty value list or the first failing point
    """
    axis = axis or scenario.sweep_axis
    values = list(values if values is not None else scenario.sweep_values)
    defenders = list(defenders or scenario.compare or [scenario.defender])
    if axis not in SWEEP_AXES:
        raise SweepError(f"sweep axis must be one of {', '.join(SWEEP_AXES)}, got {axis!r}")
    if not values:
        raise SweepError(f"sweep over {axis} has no values")

    points = [(value, kind) for value in values for kind in defenders]
    rows, reports = [], []
    for value, kind in tqdm(points, desc=f"{scenario.name} sweep", disable=not progress):
        try:
            point = scenario.with_value(axis, value)
            point = replace(point, defender=kind, name=f"{point.name}.{kind}", warm_start=None)
            report = run_scenario(point, max_workers=max_workers, progress=False)
        except BlottoError as e:
            logger.error(f"Sweep point {axis}={value} with {kind} failed: {e}")
            raise SweepError(f"sweep point {axis}={value}, defender {kind}: {e}") from e
        summary = _summarize(report.averaged(), scenario.window)
        rows.append({'axis': axis, 'value': value, 'defender': kind, 'granularity': point.game.granularity,
                     'seeds': len(report.seeds), **summary,
                     'mean_decision_ms': report.timing()['mean_decision_ms'].iloc[-1]})
        reports.append(report)
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS), reports
