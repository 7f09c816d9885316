"""Environment module: dynamic repeated game and attacker policies"""

from .attackers import (
    ATTACKER_KINDS,
    AttackerPolicy,
    GreedyQ,
    IdleAttacker,
    InduceAndStrike,
    StaticUniform,
    make_attacker,
    modal_allocation,
    strike_best_response,
)
from .storage_env import (
    NOISY,
    OBSERVATION_MODES,
    PERFECT,
    CloudStorageEnv,
    DataSchedule,
    GameState,
    ScheduleEvent,
    SlotRecord,
)

__all__ = [
    'ATTACKER_KINDS', 'AttackerPolicy', 'GreedyQ', 'IdleAttacker', 'InduceAndStrike',
    'StaticUniform', 'make_attacker', 'modal_allocation', 'strike_best_response',
    'NOISY', 'OBSERVATION_MODES', 'PERFECT', 'CloudStorageEnv', 'DataSchedule',
    'GameState', 'ScheduleEvent', 'SlotRecord',
]
