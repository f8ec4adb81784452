"""
Service Module

Contains the configuration manager and the analysis service shared by
the command line and the HTTP API.
"""

from .analysis_service import AnalysisService, deformation_payload, hmax_payload
from .config import Config

__all__ = ['AnalysisService', 'Config', 'deformation_payload', 'hmax_payload']
