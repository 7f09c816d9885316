"""Utilities module for the Blotto defense package"""

from .checks import collect_tests, run_checks

__all__ = ['collect_tests', 'run_checks']
