"""
Scenario model, key=value scenario files and named presets
"""

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from .. import config
from ..agents import DEFENDER_KINDS, DqnConfig, LearnerConfig
from ..environment.attackers import ATTACKER_KINDS, GREEDY_Q, INDUCE_AND_STRIKE, make_attacker
from ..environment.storage_env import OBSERVATION_MODES, PERFECT, CloudStorageEnv, DataSchedule, ScheduleEvent
from ..errors import GameConfigError, ScenarioParseError
from ..game.core import GameConfig, fit_granularity, quantize_data

logger = logging.getLogger(__name__)

AUTO = 'auto'
SWEEP_AXES = ('defense_budget', 'devices')

MULTIPLY = '*'
REPLACE = '='


@dataclass(frozen=True)
class EventSpec:
    """Schedule event as written; a single value applies to every device"""

    slot: int
    op: str
    values: Tuple[float, ...]

    def for_devices(self, devices: int) -> ScheduleEvent:
        values = self.values * devices if len(self.values) == 1 else self.values
        if len(values) != devices:
            raise GameConfigError(f"event at slot {self.slot} has {len(values)} values for {devices} devices")
        if self.op == MULTIPLY:
            return ScheduleEvent(self.slot, multipliers=tuple(values))
        return ScheduleEvent(self.slot, replacement=tuple(values))

    def render(self) -> str:
        return f"{self.slot}:{self.op}{','.join(repr(v) for v in self.values)}"


@dataclass(frozen=True)
class Scenario:
    """One simulation setup: game, data dynamics, attacker, defender, horizon and seeds"""

    name: str
    devices: int
    defense_budget: int
    attack_budget: int
    quant_levels: int = 10
    granularity: Union[int, str] = 1
    initial: Tuple[float, ...] = (1.0,)
    events: Tuple[EventSpec, ...] = ()
    attacker: str = GREEDY_Q
    attacker_alpha: float = config.ATTACKER_ALPHA
    attacker_gamma: float = config.ATTACKER_GAMMA
    attacker_epsilon: float = config.ATTACKER_EPSILON
    strike_slots: Tuple[int, ...] = config.STRIKE_SLOTS
    strike_window: int = config.STRIKE_WINDOW
    strike_duration: int = config.STRIKE_DURATION
    defender: str = 'hotboot-dqn'
    horizon: int = 3000
    seeds: Tuple[int, ...] = tuple(range(10))
    window: int = config.MOVING_AVERAGE_WINDOW
    observation: str = PERFECT
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    dqn: DqnConfig = field(default_factory=DqnConfig)
    warm_start: Optional[str] = None
    sweep_axis: Optional[str] = None
    sweep_values: Tuple[int, ...] = ()
    compare: Tuple[str, ...] = ()
    note: str = field(default='', compare=False)

    def __post_init__(self):
        if not self.seeds:
            raise GameConfigError(f"scenario {self.name!r} has no seeds")
        if self.attacker not in ATTACKER_KINDS:
            raise GameConfigError(f"unknown attacker {self.attacker!r}; expected one of {', '.join(ATTACKER_KINDS)}")
        if self.defender not in DEFENDER_KINDS:
            raise GameConfigError(f"unknown defender {self.defender!r}; expected one of {', '.join(DEFENDER_KINDS)}")
        unknown = [kind for kind in self.compare if kind not in DEFENDER_KINDS]
        if unknown:
            raise GameConfigError(f"unknown defender {unknown[0]!r} in compare; expected one of {', '.join(DEFENDER_KINDS)}")
        if self.observation not in OBSERVATION_MODES:
            raise GameConfigError(f"unknown observation mode {self.observation!r}")
        if self.horizon < 0 or self.window < 1:
            raise GameConfigError(f"horizon must be >= 0 and window >= 1, got {self.horizon}/{self.window}")
        if self.sweep_axis is not None and self.sweep_axis not in SWEEP_AXES:
            raise GameConfigError(f"sweep axis must be one of {', '.join(SWEEP_AXES)}, got {self.sweep_axis!r}")
        # validates budgets, granularity and the initial data vector
        _ = self.game
        self.schedule()

    @property
    def game(self) -> GameConfig:
        g = self.granularity
        if g == AUTO:
            g = fit_granularity(self.devices, self.defense_budget, self.attack_budget)
        return GameConfig(self.devices, self.defense_budget, self.attack_budget, self.quant_levels, int(g))

    def initial_levels(self) -> Tuple[float, ...]:
        if len(self.initial) == 1:
            return self.initial * self.devices
        if len(self.initial) != self.devices:
            raise GameConfigError(f"initial data has {len(self.initial)} values for {self.devices} devices")
        return self.initial

    def schedule(self) -> DataSchedule:
        initial = quantize_data(self.initial_levels(), self.quant_levels)
        return DataSchedule(initial, [e.for_devices(self.devices) for e in self.events])

    def with_value(self, axis: str, value: int) -> 'Scenario':
        """Copy with one sweep axis set; uniform initial data and events carry over to a new D"""
        if axis not in SWEEP_AXES:
            raise GameConfigError(f"sweep axis must be one of {', '.join(SWEEP_AXES)}, got {axis!r}")
        if axis == 'devices' and len(self.initial) > 1 and len(set(self.initial)) > 1:
            raise GameConfigError("a device sweep needs the same initial data size on every device")
        changes = {axis: int(value), 'name': f"{self.name}.{axis}={value}"}
        if axis == 'devices' and len(self.initial) > 1:
            changes['initial'] = (self.initial[0],)
        return replace(self, **changes)

    def attacker_params(self) -> Dict[str, object]:
        params = dict(alpha=self.attacker_alpha, gamma=self.attacker_gamma, epsilon=self.attacker_epsilon)
        if self.attacker == INDUCE_AND_STRIKE:
            params.update(strike_slots=self.strike_slots, window=self.strike_window,
                          duration=self.strike_duration)
        return params

    def make_env(self, rng: np.random.Generator, schedule: Optional[DataSchedule] = None) -> CloudStorageEnv:
        game = self.game
        attacker = make_attacker(self.attacker, game, **self.attacker_params())
        return CloudStorageEnv(game, schedule or self.schedule(), attacker, rng, self.observation)

    def scenario_sampler(self, seed_sequence: np.random.SeedSequence) -> Callable[[int], CloudStorageEnv]:
        """
        Similar scenarios for hotbooting

        Same game, each schedule phase moved by at most one level per device,
        fresh attacker randomness per emulated run.
        """
        perturb_rng = np.random.default_rng(seed_sequence.spawn(1)[0])
        base = self.schedule()

        def sample(run: int) -> CloudStorageEnv:
            attacker_rng = np.random.default_rng(seed_sequence.spawn(1)[0])
            return self.make_env(attacker_rng, base.perturbed(perturb_rng))

        return sample

    def to_text(self) -> str:
        """Render as a scenario file that parses back to an equal scenario"""
        lines = [
            f"name={self.name}",
            f"devices={self.devices}",
            f"defense_budget={self.defense_budget}",
            f"attack_budget={self.attack_budget}",
            f"quant_levels={self.quant_levels}",
            f"granularity={self.granularity}",
            f"initial={','.join(repr(v) for v in self.initial)}",
        ]
        lines.extend(f"event={e.render()}" for e in self.events)
        lines.extend([
            f"attacker={self.attacker}",
            f"defender={self.defender}",
            f"horizon={self.horizon}",
            f"seeds={','.join(str(s) for s in self.seeds)}",
            f"window={self.window}",
            f"observation={self.observation}",
        ])
        if self.attacker == INDUCE_AND_STRIKE:
            lines.append(f"strike_slots={','.join(str(s) for s in self.strike_slots)}")
            lines.append(f"strike_window={self.strike_window}")
            lines.append(f"strike_duration={self.strike_duration}")
        if self.warm_start:
            lines.append(f"warm_start={self.warm_start}")
        if self.sweep_axis:
            lines.append(f"sweep_axis={self.sweep_axis}")
            lines.append(f"sweep_values={','.join(str(v) for v in self.sweep_values)}")
        if self.compare:
            lines.append(f"compare={','.join(self.compare)}")
        defaults = Scenario.__dataclass_fields__
        for key in ('attacker_alpha', 'attacker_gamma', 'attacker_epsilon'):
            if getattr(self, key) != defaults[key].default:
                lines.append(f"{key}={getattr(self, key)!r}")
        for keys, settings, baseline in ((LEARNER_KEYS, self.learner, LearnerConfig()),
                                         (DQN_KEYS, self.dqn, DqnConfig())):
            for key, (name, _) in keys.items():
                value = getattr(settings, name)
                if value != getattr(baseline, name):
                    lines.append(f"{key}={str(value).lower() if isinstance(value, bool) else repr(value)}")
        return '\n'.join(lines) + '\n'


def _ints(text: str) -> Tuple[int, ...]:
    """Comma list of integers; a-b expands to an inclusive range"""
    values: List[int] = []
    for part in text.split(','):
        part = part.strip()
        if not part:
            continue
        if '-' in part[1:]:
            lo, hi = part.split('-', 1) if not part.startswith('-') else (part, part)
            values.extend(range(int(lo), int(hi) + 1))
        else:
            values.append(int(part))
    return tuple(values)


def _floats(text: str) -> Tuple[float, ...]:
    return tuple(float(v) for v in text.split(',') if v.strip())


def _names(text: str) -> Tuple[str, ...]:
    return tuple(v.strip() for v in text.split(',') if v.strip())


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ('1', 'true', 'yes', 'on'):
        return True
    if lowered in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _event(text: str) -> EventSpec:
    slot, _, rest = text.partition(':')
    rest = rest.strip()
    if not rest or rest[0] not in (MULTIPLY, REPLACE):
        raise ValueError(f"event must look like SLOT:*values or SLOT:=values, got {text!r}")
    return EventSpec(int(slot), rest[0], _floats(rest[1:]))


SCENARIO_KEYS: Dict[str, Tuple[str, Callable[[str], object]]] = {
    'name': ('name', str.strip),
    'devices': ('devices', int),
    'defense_budget': ('defense_budget', int),
    'attack_budget': ('attack_budget', int),
    'quant_levels': ('quant_levels', int),
    'granularity': ('granularity', lambda v: AUTO if v.strip() == AUTO else int(v)),
    'initial': ('initial', _floats),
    'attacker': ('attacker', str.strip),
    'attacker_alpha': ('attacker_alpha', float),
    'attacker_gamma': ('attacker_gamma', float),
    'attacker_epsilon': ('attacker_epsilon', float),
    'strike_slots': ('strike_slots', _ints),
    'strike_window': ('strike_window', int),
    'strike_duration': ('strike_duration', int),
    'defender': ('defender', str.strip),
    'horizon': ('horizon', int),
    'seeds': ('seeds', _ints),
    'window': ('window', int),
    'observation': ('observation', str.strip),
    'warm_start': ('warm_start', str.strip),
    'sweep_axis': ('sweep_axis', str.strip),
    'sweep_values': ('sweep_values', _ints),
    'compare': ('compare', _names),
}

LEARNER_KEYS: Dict[str, Tuple[str, Callable[[str], object]]] = {
    'alpha': ('alpha', float),
    'gamma': ('gamma', float),
    'delta': ('delta', float),
    'epsilon': ('epsilon', float),
    'hotboot_runs': ('hotboot_runs', int),
    'hotboot_slots': ('hotboot_slots', int),
}

DQN_KEYS: Dict[str, Tuple[str, Callable[[str], object]]] = {
    'dqn_window': ('window', int),
    'minibatch': ('minibatch', int),
    'replay_capacity': ('replay_capacity', int),
    'learning_rate': ('learning_rate', float),
    'conv1_filters': ('conv1_filters', int),
    'conv2_filters': ('conv2_filters', int),
    'hidden_units': ('hidden_units', int),
    'input_side': ('input_side', int),
    'relu_output': ('relu_output', _bool),
}

# learner settings shared by both defender families
SHARED_KEYS = ('gamma', 'epsilon', 'hotboot_runs', 'hotboot_slots')


def parse_scenario(text: str, source: str = '<scenario>') -> Scenario:
    """
    Parse key=value lines; '#' starts a comment and `event` may repeat

    Raises:
        ScenarioParseError: naming the source and line of the first bad entry
    """
    fields_: Dict[str, object] = {}
    learner: Dict[str, object] = {}
    dqn: Dict[str, object] = {}
    events: List[EventSpec] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition('=')
        key = key.strip()
        if not sep:
            raise ScenarioParseError(f"{source}:{number}: expected key=value, got {raw.strip()!r}")
        try:
            if key == 'event':
                events.append(_event(value))
            elif key in SCENARIO_KEYS:
                name, convert = SCENARIO_KEYS[key]
                fields_[name] = convert(value)
            elif key in LEARNER_KEYS or key in DQN_KEYS:
                if key in LEARNER_KEYS:
                    name, convert = LEARNER_KEYS[key]
                    learner[name] = convert(value)
                if key in SHARED_KEYS:
                    dqn[key] = learner[key]
                if key in DQN_KEYS:
                    name, convert = DQN_KEYS[key]
                    dqn[name] = convert(value)
            else:
                raise ScenarioParseError(f"{source}:{number}: unknown key {key!r}")
        except ScenarioParseError:
            raise
        except ValueError as e:
            raise ScenarioParseError(f"{source}:{number}: bad value for {key!r}: {e}") from e

    if 'name' not in fields_:
        fields_['name'] = Path(source).stem if source != '<scenario>' else 'scenario'
    missing = [k for k in ('devices', 'defense_budget', 'attack_budget') if k not in fields_]
    if missing:
        raise ScenarioParseError(f"{source}: missing required keys {', '.join(missing)}")
    try:
        return Scenario(**fields_, events=tuple(events), learner=LearnerConfig(**learner), dqn=DqnConfig(**dqn))
    except (GameConfigError, ValueError) as e:
        raise ScenarioParseError(f"{source}: {e}") from e


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    logger.info(f"Loading scenario from {path}")
    return parse_scenario(path.read_text(), str(path))


def _presets() -> Dict[str, Scenario]:
    growth = (EventSpec(1000, MULTIPLY, (1.167,)), EventSpec(2000, MULTIPLY, (1.143,)))
    learners = ('hotboot-dqn', 'hotboot-phc', 'q')
    return {
        'fig4': Scenario(
            name='fig4', devices=10, defense_budget=10, attack_budget=2, granularity=AUTO,
            initial=(1.0,), attacker=GREEDY_Q,
            note='10 devices, 10 defense CPUs, 2 attack CPUs; granularity auto-fit to 2',
        ),
        'fig4-reduced': Scenario(
            name='fig4-reduced', devices=3, defense_budget=6, attack_budget=2,
            initial=(1.0,), attacker=GREEDY_Q,
            note='desk-scale version of fig4 with 3 devices and 6 defense CPUs',
        ),
        'fig5': Scenario(
            name='fig5', devices=3, defense_budget=16, attack_budget=4, granularity=AUTO,
            initial=(0.6,), events=growth, attacker=INDUCE_AND_STRIKE,
            note='data grows x1.167 at slot 1000 and x1.143 at slot 2000; strikes at 1000 and 2000',
        ),
        'fig5-reduced': Scenario(
            name='fig5-reduced', devices=3, defense_budget=8, attack_budget=4, granularity=AUTO,
            initial=(0.6,), events=growth, attacker=INDUCE_AND_STRIKE,
            note='fig5 with 8 defense CPUs',
        ),
        'fig6': Scenario(
            name='fig6', devices=3, defense_budget=12, attack_budget=4,
            initial=(0.6,), events=growth, attacker=GREEDY_Q, defender='hotboot-dqn',
            sweep_axis='defense_budget', sweep_values=(12, 13, 14, 15, 16), compare=learners,
            note='defense budget sweep 12..16 with data changing every 1000 slots; range approximate',
        ),
        'fig7': Scenario(
            name='fig7', devices=3, defense_budget=21, attack_budget=4, granularity=AUTO,
            initial=(0.6,), events=growth, attacker=GREEDY_Q, defender='hotboot-dqn',
            sweep_axis='devices', sweep_values=(3, 4, 5, 6), compare=learners,
            note='device sweep at 21 defense CPUs with data changing every 1000 slots; '
                 'granularity auto-fit per point, range approximate',
        ),
    }


PRESETS = _presets()

# closed-form sweep: (S_M values, D values, S_N)
NE_PRESETS = {
    'fig2': ((600, 700, 800, 900, 1000, 1100, 1200), (20, 40, 60, 80), 150),
}


def get_preset(name: str) -> Scenario:
    if name not in PRESETS:
        raise ScenarioParseError(f"unknown preset {name!r}; expected one of {', '.join(sorted(PRESETS))}")
    return PRESETS[name]
