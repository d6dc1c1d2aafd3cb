"""
Operations package - Contains the command-line operations (runs, audits, checks, utilities)
"""

__version__ = '1.0.0'
