"""
Models Module

Contains Pydantic models for methods, solver settings, run configuration
and API responses.
"""

from .method_models import MethodKind, MethodSpec, SolverConfig
from .request_models import JobStatusResponse, RunConfig

__all__ = ['MethodKind', 'MethodSpec', 'SolverConfig', 'RunConfig', 'JobStatusResponse']
