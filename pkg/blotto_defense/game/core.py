"""
Game Core for the CPU allocation game
Action sets, per-device outcomes, utilities and data protection level
"""

import hashlib
import logging
from dataclasses import dataclass
from math import comb
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .. import config
from ..errors import (
    ActionSpaceTooLargeError,
    DataSizeError,
    DimensionMismatchError,
    EmptyStorageError,
    GameConfigError,
    InfeasibleAllocationError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GameConfig:
    """Parameters of one CPU allocation game"""

    devices: int
    defense_budget: int
    attack_budget: int
    quant_levels: int
    granularity: int = 1

    def __post_init__(self):
        for name in ('devices', 'defense_budget', 'attack_budget', 'quant_levels', 'granularity'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise GameConfigError(f"{name} must be an integer, got {value!r}")
            if value < 1:
                raise GameConfigError(f"{name} must be >= 1, got {value}")
        if self.granularity > min(self.defense_budget, self.attack_budget):
            raise GameConfigError(
                f"granularity {self.granularity} exceeds min(S_M, S_N) = "
                f"{min(self.defense_budget, self.attack_budget)}"
            )

    @property
    def defense_action_count(self) -> int:
        return count_actions(self.defense_budget, self.devices, self.granularity)

    @property
    def attack_action_count(self) -> int:
        return count_actions(self.attack_budget, self.devices, self.granularity)

    def defense_actions(self, cap: Optional[int] = None) -> List['Allocation']:
        return enumerate_actions(self.defense_budget, self.devices, self.granularity, cap)

    def attack_actions(self, cap: Optional[int] = None) -> List['Allocation']:
        return enumerate_actions(self.attack_budget, self.devices, self.granularity, cap)

    def describe(self) -> str:
        return (f"D={self.devices} S_M={self.defense_budget} S_N={self.attack_budget} "
                f"L={self.quant_levels} g={self.granularity}")


@dataclass(frozen=True)
class Allocation:
    """CPU counts per device, validated against a budget

    analysis_only marks draws from independent marginals that may exceed the budget.
    """

    counts: Tuple[int, ...]
    budget: int
    analysis_only: bool = False

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        object.__setattr__(self, 'counts', counts)
        if any(c < 0 for c in counts):
            raise InfeasibleAllocationError(f"negative CPU count in {counts}")
        if not self.analysis_only and sum(counts) > self.budget:
            raise InfeasibleAllocationError(
                f"allocation {counts} uses {sum(counts)} CPUs, budget is {self.budget}"
            )

    def __len__(self) -> int:
        return len(self.counts)

    def __iter__(self) -> Iterator[int]:
        return iter(self.counts)

    def __getitem__(self, index: int) -> int:
        return self.counts[index]

    @property
    def total(self) -> int:
        return sum(self.counts)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.int64)

    def on_lattice(self, granularity: int) -> bool:
        return all(c % granularity == 0 for c in self.counts)

    @classmethod
    def zeros(cls, devices: int, budget: int) -> 'Allocation':
        return cls(tuple([0] * devices), budget)


@dataclass(frozen=True)
class DataSizeVector:
    """Per-device normalized data sizes on the 1/L grid"""

    ticks: Tuple[int, ...]
    quant_levels: int

    def __post_init__(self):
        ticks = tuple(int(t) for t in self.ticks)
        object.__setattr__(self, 'ticks', ticks)
        if self.quant_levels < 1:
            raise DataSizeError(f"quant_levels must be >= 1, got {self.quant_levels}")
        for t in ticks:
            if t < 0 or t > self.quant_levels:
                raise DataSizeError(f"level {t}/{self.quant_levels} outside [0, 1]")

    @property
    def levels(self) -> Tuple[float, ...]:
        return tuple(t / self.quant_levels for t in self.ticks)

    @property
    def total(self) -> float:
        return sum(self.ticks) / self.quant_levels

    def __len__(self) -> int:
        return len(self.ticks)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.ticks, dtype=float) / self.quant_levels

    @classmethod
    def from_levels(cls, levels: Sequence[float], quant_levels: int) -> 'DataSizeVector':
        """Build from values already on the grid; raises if any value is off-grid"""
        ticks = []
        for value in levels:
            scaled = float(value) * quant_levels
            tick = int(round(scaled))
            if abs(scaled - tick) > 1e-9:
                raise DataSizeError(f"value {value} is not on the 1/{quant_levels} grid")
            ticks.append(tick)
        return cls(tuple(ticks), quant_levels)


@dataclass(frozen=True)
class SlotOutcome:
    """Result of one slot of the game"""

    utility_defender: float
    utility_attacker: float
    protection_level: float
    per_device_sign: Tuple[int, ...]


Weights = Union[DataSizeVector, Sequence[float], np.ndarray]


def sign(x: float) -> int:
    """Sign function with sgn(0) = 0"""
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def count_actions(budget: int, devices: int, granularity: int = 1) -> int:
    """Number of D-vectors of nonnegative multiples of g summing to at most budget"""
    return comb(budget // granularity + devices, devices)


def _lattice(units: int, devices: int) -> Iterator[Tuple[int, ...]]:
    # lexicographic order over vectors of unit counts with sum <= units
    if devices == 1:
        for u in range(units + 1):
            yield (u,)
        return
    for first in range(units + 1):
        for rest in _lattice(units - first, devices - 1):
            yield (first,) + rest


def enumerate_actions(budget: int, devices: int, granularity: int = 1,
                      cap: Optional[int] = None) -> List[Allocation]:
    """
    Enumerate every allocation of multiples of the granularity under the budget

    Args:
        budget: CPU budget
        devices: Number of storage devices
        granularity: CPU step
        cap: Maximum number of actions (defaults to config.ACTION_CAP)

    Returns:
        Allocations in lexicographic order
    """
    if devices < 1 or granularity < 1 or budget < 0:
        raise GameConfigError(
            f"invalid action set parameters: budget={budget}, devices={devices}, granularity={granularity}"
        )
    cap = config.ACTION_CAP if cap is None else cap
    size = count_actions(budget, devices, granularity)
    if size > cap:
        raise ActionSpaceTooLargeError(
            f"action space too large; increase granularity "
            f"({size} actions for budget={budget}, D={devices}, g={granularity}; cap {cap})"
        )
    units = budget // granularity
    return [Allocation(tuple(u * granularity for u in vec), budget)
            for vec in _lattice(units, devices)]


def action_matrix(actions: Sequence[Allocation]) -> np.ndarray:
    """Stack allocations into an (n_actions, D) integer array"""
    return np.array([a.counts for a in actions], dtype=np.int64).reshape(len(actions), -1)


def fit_granularity(devices: int, defense_budget: int, attack_budget: int,
                    target: Optional[int] = None) -> int:
    """Smallest granularity keeping the defense action set within the target size"""
    target = config.AUTO_ACTION_TARGET if target is None else target
    for g in range(1, min(defense_budget, attack_budget) + 1):
        if count_actions(defense_budget, devices, g) <= target:
            if g > 1:
                logger.debug(f"Granularity raised to {g} for D={devices}, S_M={defense_budget}")
            return g
    raise ActionSpaceTooLargeError(
        f"action space too large; increase granularity "
        f"(no g <= {min(defense_budget, attack_budget)} brings D={devices}, "
        f"S_M={defense_budget} under {target} actions)"
    )


def config_hash(game: GameConfig, kind: str, **extras) -> str:
    """SHA-256 over the canonical parameter string of a learner configuration"""
    parts = [
        f"kind={kind}",
        f"devices={game.devices}",
        f"defense_budget={game.defense_budget}",
        f"attack_budget={game.attack_budget}",
        f"quant_levels={game.quant_levels}",
        f"granularity={game.granularity}",
    ]
    parts.extend(f"{key}={extras[key]}" for key in sorted(extras))
    return hashlib.sha256(';'.join(parts).encode('utf-8')).hexdigest()


def _weights(B: Weights) -> np.ndarray:
    if isinstance(B, DataSizeVector):
        return B.as_array()
    return np.asarray(B, dtype=float)


def _counts(allocation: Union[Allocation, Sequence[int]]) -> np.ndarray:
    if isinstance(allocation, Allocation):
        return allocation.as_array()
    return np.asarray(allocation, dtype=np.int64)


def device_signs(M: Union[Allocation, Sequence[int]], N: Union[Allocation, Sequence[int]]) -> np.ndarray:
    m, n = _counts(M), _counts(N)
    if m.shape != n.shape:
        raise DimensionMismatchError(f"defense has {m.size} entries, attack has {n.size}")
    return np.sign(m - n).astype(np.int64)


def utility_defender(B: Weights, M: Union[Allocation, Sequence[int]],
                     N: Union[Allocation, Sequence[int]]) -> float:
    """Sum over devices of B_i * sgn(M_i - N_i)"""
    weights = _weights(B)
    signs = device_signs(M, N)
    if weights.shape != signs.shape:
        raise DimensionMismatchError(f"data has {weights.size} entries, allocations have {signs.size}")
    return float(np.dot(weights, signs))


def utility_attacker(B: Weights, M: Union[Allocation, Sequence[int]],
                     N: Union[Allocation, Sequence[int]]) -> float:
    return -utility_defender(B, M, N)


def protection_level(B: Weights, M: Union[Allocation, Sequence[int]],
                     N: Union[Allocation, Sequence[int]]) -> float:
    """Normalized size of the data on devices the defender wins"""
    weights = _weights(B)
    total = float(weights.sum())
    if total <= 0:
        raise EmptyStorageError("empty storage: total data size is zero")
    return utility_defender(weights, M, N) / total


def resolve_slot(B: Weights, M: Union[Allocation, Sequence[int]],
                 N: Union[Allocation, Sequence[int]]) -> SlotOutcome:
    weights = _weights(B)
    signs = device_signs(M, N)
    if weights.shape != signs.shape:
        raise DimensionMismatchError(f"data has {weights.size} entries, allocations have {signs.size}")
    u_d = float(np.dot(weights, signs))
    total = float(weights.sum())
    return SlotOutcome(
        utility_defender=u_d,
        utility_attacker=-u_d,
        protection_level=u_d / total if total > 0 else 0.0,
        per_device_sign=tuple(int(s) for s in signs),
    )


def quantize_data(raw: Sequence[float], quant_levels: int) -> DataSizeVector:
    """Round each size to the nearest multiple of 1/L, ties rounding up"""
    values = np.asarray(raw, dtype=float)
    if values.ndim != 1:
        raise DataSizeError(f"expected a vector of sizes, got shape {values.shape}")
    if np.any(~np.isfinite(values)) or np.any(values < 0) or np.any(values > 1):
        raise DataSizeError(f"data sizes must lie in [0, 1], got {values.tolist()}")
    # nudge keeps binary-representation ties (e.g. 0.35 * 10) rounding up
    ticks = np.floor(values * quant_levels + 0.5 + 1e-9).astype(np.int64)
    return DataSizeVector(tuple(ticks.tolist()), quant_levels)
