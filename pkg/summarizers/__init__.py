"""
Summarizers module for simulation summary tables.
"""

from .smry_scenario import create_smry_scenario_table
from .test_smry_scenario import run_all_tests

__all__ = ['create_smry_scenario_table', 'run_all_tests']
