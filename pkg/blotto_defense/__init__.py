"""
Blotto Defense Package

CPU allocation game engine, cloud storage environment and the tabular and
neural defenders that learn against adaptive attackers, with a DuckDB
results store.
"""

from .database.manager import ResultsStore
from .game.core import Allocation, DataSizeVector, GameConfig
from .harness.runner import MetricsReport, run_scenario, run_sweep
from .harness.scenario import Scenario, get_preset, load_scenario

__version__ = "0.1.0"
__all__ = [
    "Allocation", "DataSizeVector", "GameConfig", "ResultsStore",
    "MetricsReport", "run_scenario", "run_sweep",
    "Scenario", "get_preset", "load_scenario",
]
