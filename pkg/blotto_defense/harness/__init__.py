"""Harness module: scenarios, seed runners, artifacts and equilibrium tables"""

from .analysis import analyze_point, marginal_table, ne_sweep, summary_row
from .artifacts import load_artifact, load_network, load_tables, save_artifact, save_network, save_tables
from .runner import MetricsReport, SeedRun, hotboot, make_defender, run_scenario, run_seed, run_sweep, write_report
from .scenario import NE_PRESETS, PRESETS, Scenario, get_preset, load_scenario, parse_scenario

__all__ = [
    'analyze_point', 'marginal_table', 'ne_sweep', 'summary_row',
    'load_artifact', 'load_network', 'load_tables', 'save_artifact', 'save_network', 'save_tables',
    'MetricsReport', 'SeedRun', 'hotboot', 'make_defender', 'run_scenario', 'run_seed', 'run_sweep', 'write_report',
    'NE_PRESETS', 'PRESETS', 'Scenario', 'get_preset', 'load_scenario', 'parse_scenario',
]
