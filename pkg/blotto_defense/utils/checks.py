"""
Check runner shared by the self-test suites.

Each test module exposes zero-argument test_* functions; run_checks executes
them, logs a pass/fail line per check and returns the results by name.
"""

import logging
import time
import traceback
from types import ModuleType
from typing import Callable, Dict

logger = logging.getLogger(__name__)


def collect_tests(module: ModuleType) -> Dict[str, Callable[[], None]]:
    """Return the module's test_* functions in definition order."""
    tests = {}
    for name, value in vars(module).items():
        if name.startswith('test_') and callable(value):
            tests[name[len('test_'):]] = value
    return tests


def run_checks(suite: str, checks: Dict[str, Callable[[], None]]) -> Dict[str, bool]:
    """Run every check and return results."""

    logger.info(f"Starting {suite} checks...")

    results = {}
    for name, check in checks.items():
        started = time.perf_counter()
        try:
            check()
            results[name] = True
            logger.info(f"✅ {name} PASSED ({time.perf_counter() - started:.2f}s)")
        except AssertionError as e:
            results[name] = False
            logger.error(f"❌ {name} FAILED: {e}")
        except Exception as e:
            results[name] = False
            logger.error(f"❌ {name} ERROR: {type(e).__name__}: {e}")
            logger.debug(traceback.format_exc())

    passed = sum(results.values())
    logger.info(f"=== {suite.upper()} SUMMARY: {passed}/{len(results)} passed ===")
    return results
