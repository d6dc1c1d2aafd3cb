"""
Report Helpers Package
Helper package for CSV reports, exit codes and status labels
"""

from . import constants, utils

__all__ = ['constants', 'utils']
