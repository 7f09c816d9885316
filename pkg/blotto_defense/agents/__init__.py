"""Agents module: tabular and neural defenders plus reference baselines"""

from .base import Defender, run_defense
from .baseline import NE_MARGINAL, RANDOM, NeMarginalDefender, RandomDefender
from .dqn import (
    DQN,
    HOTBOOT_DQN,
    DqnConfig,
    DqnDefender,
    ReplayMemory,
    build_input,
    dqn_select_action,
    hotboot_dqn,
    run_dqn_defense,
    train_minibatch,
)
from .network import NetworkParams, backward, check_gradients, forward, init_params
from .tabular import (
    HOTBOOT_PHC,
    PHC,
    Q_LEARNING,
    LearnerConfig,
    PhcDefender,
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

DEFENDER_KINDS = (Q_LEARNING, PHC, HOTBOOT_PHC, DQN, HOTBOOT_DQN, NE_MARGINAL, RANDOM)

__all__ = [
    'Defender', 'run_defense', 'NE_MARGINAL', 'RANDOM', 'NeMarginalDefender', 'RandomDefender',
    'DQN', 'HOTBOOT_DQN', 'DqnConfig', 'DqnDefender', 'ReplayMemory', 'build_input',
    'dqn_select_action', 'hotboot_dqn', 'run_dqn_defense', 'train_minibatch',
    'NetworkParams', 'backward', 'check_gradients', 'forward', 'init_params',
    'HOTBOOT_PHC', 'PHC', 'Q_LEARNING', 'LearnerConfig', 'PhcDefender', 'PolicyTable',
    'QDefender', 'QTable', 'hotboot_phc', 'phc_policy_update', 'phc_select_action',
    'q_update', 'run_phc_defense', 'run_q_defense', 'DEFENDER_KINDS',
]
