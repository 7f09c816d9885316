"""
Configuration settings for the Blotto defense simulator
"""

import os
from pathlib import Path

# Logging settings
LOG_LEVEL = os.getenv("BLOTTO_LOG_LEVEL", "INFO")
LOG_FILE = os.getenv("BLOTTO_LOG_FILE", "blotto_defense.log")

# Execution settings
MAX_WORKERS = int(os.getenv("BLOTTO_MAX_WORKERS", "4"))
OUT_DIR = Path(os.getenv("BLOTTO_OUT_DIR", "results"))
DB_PATH = os.getenv("BLOTTO_DB_PATH", "blotto_results.duckdb")

# Action-space limits
ACTION_CAP = int(os.getenv("BLOTTO_ACTION_CAP", "100000"))
AUTO_ACTION_TARGET = int(os.getenv("BLOTTO_AUTO_ACTION_TARGET", "10000"))

# Tabular learner defaults
ALPHA = 0.9
GAMMA = 0.5
DELTA = 0.02
EPSILON = 0.1
HOTBOOT_RUNS = 10
HOTBOOT_SLOTS = 500

# Attacker defaults (mirror the defender's constants)
ATTACKER_ALPHA = 0.9
ATTACKER_GAMMA = 0.5
ATTACKER_EPSILON = 0.1
STRIKE_WINDOW = 200
STRIKE_SLOTS = (1000, 2000)
STRIKE_DURATION = 200

# DQN defaults
DQN_WINDOW = 12
DQN_MINIBATCH = 16
REPLAY_CAPACITY = 10000
LEARNING_RATE = 1e-3
CONV1_FILTERS = 20
CONV2_FILTERS = 40
HIDDEN_UNITS = 180

# Sampling and numeric tolerances
FEASIBLE_ATTEMPTS = 1000
PMF_TOLERANCE = 1e-12
POLICY_TOLERANCE = 1e-9

# Metrics
MOVING_AVERAGE_WINDOW = 50

# Artifact format versions
TABLE_ARTIFACT_VERSION = 1
NETWORK_ARTIFACT_VERSION = 1
