"""
Utilities Module

This module contains utility functions for:
- Logging configuration
- Environment loading
- Exceptions and exit codes
- Report writing (CSV / JSON)
"""

from .env_loader import load_root_env
from .exceptions import ModeshapeError, OutputError, ParameterError
from .logger import setup_logger
from .report_writer import write_frame, write_json

__all__ = [
    'load_root_env',
    'ModeshapeError',
    'OutputError',
    'ParameterError',
    'setup_logger',
    'write_frame',
    'write_json',
]
