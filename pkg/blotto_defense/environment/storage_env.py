"""
Cloud storage environment for the repeated CPU allocation game
Data-size schedules, slot resolution and the defender's view of past attacks
"""

import bisect
import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Hashable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import DataSizeError, DimensionMismatchError, InfeasibleAllocationError
from ..game.core import (
    Allocation,
    DataSizeVector,
    GameConfig,
    SlotOutcome,
    quantize_data,
    resolve_slot,
)

if TYPE_CHECKING:
    from .attackers import AttackerPolicy

logger = logging.getLogger(__name__)

PERFECT = 'perfect'
NOISY = 'noisy'
OBSERVATION_MODES = (PERFECT, NOISY)


@dataclass(frozen=True)
class GameState:
    """Previous attack allocation and current data sizes"""

    prev_attack: Allocation
    data: DataSizeVector

    def key(self) -> Hashable:
        return (self.prev_attack.counts, self.data.ticks)


@dataclass(frozen=True)
class ScheduleEvent:
    """From `slot` onwards sizes are multiplied by `multipliers` or replaced by `replacement`"""

    slot: int
    multipliers: Optional[Tuple[float, ...]] = None
    replacement: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if (self.multipliers is None) == (self.replacement is None):
            raise DataSizeError(f"event at slot {self.slot} needs exactly one of multipliers/replacement")
        if self.slot < 1:
            raise DataSizeError(f"event slot must be >= 1, got {self.slot}")

    def apply(self, raw: np.ndarray) -> np.ndarray:
        vector = np.asarray(self.multipliers if self.multipliers is not None else self.replacement, dtype=float)
        if vector.shape != raw.shape:
            raise DimensionMismatchError(
                f"event at slot {self.slot} has {vector.size} entries, data has {raw.size}"
            )
        return raw * vector if self.multipliers is not None else vector.copy()


class DataSchedule:
    """
    Piecewise-constant data sizes over slots

    Events accumulate on the unquantized sizes; each phase is clamped to
    [0, 1] and quantized to the 1/L grid.
    """

    def __init__(self, initial: DataSizeVector, events: Sequence[ScheduleEvent] = ()):
        self.initial = initial
        self.events = tuple(events)
        slots = [e.slot for e in self.events]
        if any(b <= a for a, b in zip(slots, slots[1:])):
            raise DataSizeError(f"event slots must be strictly increasing, got {slots}")

        self._starts: List[int] = [1]
        self._raw: List[np.ndarray] = [initial.as_array()]
        self._phases: List[DataSizeVector] = [initial]
        raw = initial.as_array()
        for event in self.events:
            raw = event.apply(raw)
            clipped = np.clip(raw, 0.0, 1.0)
            if np.any(clipped != raw):
                logger.warning(f"Data sizes clamped to [0, 1] at slot {event.slot}: {raw.tolist()}")
            phase = quantize_data(clipped, initial.quant_levels)
            if event.slot == 1:
                self._raw[0], self._phases[0] = raw, phase
            else:
                self._starts.append(event.slot)
                self._raw.append(raw)
                self._phases.append(phase)

    @property
    def devices(self) -> int:
        return len(self.initial)

    @property
    def quant_levels(self) -> int:
        return self.initial.quant_levels

    def _phase_index(self, slot: int) -> int:
        return bisect.bisect_right(self._starts, slot) - 1

    def raw_at(self, slot: int) -> np.ndarray:
        """Unquantized sizes in force at the slot"""
        return self._raw[self._phase_index(max(slot, 1))].copy()

    def data_at(self, slot: int) -> DataSizeVector:
        return self._phases[self._phase_index(max(slot, 1))]

    def phases(self) -> List[Tuple[int, DataSizeVector]]:
        return list(zip(self._starts, self._phases))

    def perturbed(self, rng: np.random.Generator) -> 'DataSchedule':
        """Similar schedule: every phase shifted by at most one level per device"""
        levels = self.quant_levels
        shifted = []
        for start, phase in self.phases():
            ticks = np.clip(np.asarray(phase.ticks) + rng.integers(-1, 2, self.devices), 0, levels)
            shifted.append((start, DataSizeVector(tuple(ticks.tolist()), levels)))
        initial = shifted[0][1]
        events = [ScheduleEvent(start, replacement=phase.levels) for start, phase in shifted[1:]]
        return DataSchedule(initial, events)

    @classmethod
    def constant(cls, levels: Sequence[float], quant_levels: int) -> 'DataSchedule':
        return cls(quantize_data(levels, quant_levels))


@dataclass(frozen=True)
class SlotRecord:
    """One resolved slot"""

    slot: int
    defense: Allocation
    attack: Allocation
    outcome: SlotOutcome
    state_before: GameState


@dataclass
class CloudStorageEnv:
    """
    Repeated game between a learning defender and an attacker policy

    Slots are numbered from 1. The state seen before slot k carries the
    attack of slot k-1 (all zeros before the first slot) and the data
    sizes in force at slot k.
    """

    game: GameConfig
    schedule: DataSchedule
    attacker: 'AttackerPolicy'
    rng: np.random.Generator
    observation: str = PERFECT
    slot: int = field(default=1, init=False)

    def __post_init__(self):
        if self.schedule.devices != self.game.devices:
            raise DimensionMismatchError(
                f"schedule has {self.schedule.devices} devices, game has {self.game.devices}"
            )
        if self.schedule.quant_levels != self.game.quant_levels:
            raise DataSizeError(
                f"schedule uses L={self.schedule.quant_levels}, game uses L={self.game.quant_levels}"
            )
        if self.observation not in OBSERVATION_MODES:
            raise ValueError(f"unknown observation mode {self.observation!r}")
        self._observed_attack = Allocation.zeros(self.game.devices, self.game.attack_budget)

    def observe_state(self) -> GameState:
        return GameState(self._observed_attack, self.schedule.data_at(self.slot))

    def _as_defense(self, defense: Union[Allocation, Sequence[int]]) -> Allocation:
        counts = defense.counts if isinstance(defense, Allocation) else tuple(int(c) for c in defense)
        if len(counts) != self.game.devices:
            raise DimensionMismatchError(f"defense has {len(counts)} entries, game has {self.game.devices}")
        return Allocation(counts, self.game.defense_budget)

    def _reveal(self, defense: Allocation, attack: Allocation) -> Allocation:
        if self.observation == PERFECT:
            return attack
        # compromised devices only
        counts = tuple(n if n > m else 0 for m, n in zip(defense.counts, attack.counts))
        return Allocation(counts, self.game.attack_budget)

    def step(self, defense: Union[Allocation, Sequence[int]],
             rng: Optional[np.random.Generator] = None) -> SlotRecord:
        """
        Resolve one slot against the attacker's draw

        Args:
            defense: Defender allocation for the current slot
            rng: Random source for the attacker (defaults to the environment's own)
        """
        rng = self.rng if rng is None else rng
        M = self._as_defense(defense)
        state = self.observe_state()
        N = self.attacker.act(self.slot, state.data, rng)
        if N.total > self.game.attack_budget or len(N) != self.game.devices:
            raise InfeasibleAllocationError(f"attacker emitted {N.counts} at slot {self.slot}")

        outcome = resolve_slot(state.data, M, N)
        self.attacker.observe(self.slot, M, N, outcome)
        record = SlotRecord(self.slot, M, N, outcome, state)
        self._observed_attack = self._reveal(M, N)
        self.slot += 1
        return record
