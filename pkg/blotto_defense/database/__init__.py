"""Database module for the Blotto defense simulator"""

from .manager import ResultsStore

__all__ = ['ResultsStore']
