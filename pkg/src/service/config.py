"""
Configuration Management

Handles loading and accessing configuration settings from YAML files
and environment variables.
"""

import os
from typing import Any, Dict, Optional

import yaml
from loguru import logger

DEFAULT_CONFIG_FILE = 'config.yaml'


class Config:
    """
    Configuration manager for the modeshape analysis service.

    Loads settings from config.yaml (or the file named by MODESHAPE_CONFIG)
    with fallback to defaults. Supports environment variable overrides.
    """

    def __init__(self, config_file: Optional[str] = None):
        """
        Initialize configuration manager.

        Args:
            config_file: Path to the YAML configuration file
        """
        self.config_file = config_file or os.getenv('MODESHAPE_CONFIG', DEFAULT_CONFIG_FILE)
        self.settings = self.load_config()

    def load_config(self) -> Dict[str, Any]:
        """
        Load configuration from file with fallback to defaults.

        Returns:
            Dictionary containing all configuration settings
        """
        defaults = self._get_default_config()
        if not os.path.exists(self.config_file):
            logger.debug(f"Config file {self.config_file} not found, using defaults")
            return defaults

        try:
            with open(self.config_file, 'r', encoding='utf-8') as file:
                config = yaml.safe_load(file) or {}
            # Merge with defaults to ensure all keys exist
            return self._deep_merge(defaults, config)
        except (OSError, yaml.YAMLError) as e:
            logger.warning(f"Error loading config from {self.config_file}: {e}; using defaults")
            return defaults

    def _get_default_config(self) -> Dict[str, Any]:
        """
        Return default configuration settings.

        Returns:
            Dictionary with default configuration values
        """
        return {
            "service": {
                "name": "Modeshape Analysis Service",
                "version": "1.0.0",
                "host": "0.0.0.0",
                "port": int(os.getenv("PORT", 8000)),
            },
            "logging": {
                "level": os.getenv("MODESHAPE_LOG_LEVEL", "INFO"),
                "file_rotation": "1 day",
                "file_retention": "7 days",
                "log_dir": None,
            },
            "analysis": {
                "pf_floor": 1e-3,
                "cluster_rel_tol": 1e-6,
                "gy_cond_max": 1e12,
                "n_modes": 5,
                "top_pf": 3,
                "float_digits": 12,
                "workers": 1,
            },
            "solver": {
                "newton_tol": 1e-12,
                "max_newton": 25,
                "consistency_tol": 1e-8,
            },
            "equilibrium": {
                "tol": 1e-10,
                "max_iter": 50,
            },
            "grid": {
                "hmin": 1e-4,
                "hmax": 1e-1,
                "hpoints": 20,
            },
        }

    def _deep_merge(self, base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
        """
        Deep merge two dictionaries.

        Args:
            base: Base dictionary
            override: Override dictionary

        Returns:
            Merged dictionary
        """
        result = base.copy()
        for key, value in override.items():
            if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                result[key] = self._deep_merge(result[key], value)
            else:
                result[key] = value
        return result

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get configuration value by key (supports dot notation).

        Args:
            key: Configuration key (e.g., 'analysis.pf_floor', 'grid.hpoints')
            default: Default value if key not found

        Returns:
            Configuration value or default
        """
        keys = key.split('.')
        value = self.settings

        try:
            for k in keys:
                value = value[k]
            return value
        except (KeyError, TypeError):
            return default

    def get_service_config(self) -> Dict[str, Any]:
        """Get service-specific configuration."""
        return self.get('service', {})

    def get_logging_config(self) -> Dict[str, Any]:
        """Get logging configuration."""
        return self.get('logging', {})

    def get_analysis_config(self) -> Dict[str, Any]:
        """Get analysis thresholds and defaults."""
        return self.get('analysis', {})

    def get_solver_config(self) -> Dict[str, Any]:
        """Get Newton settings for time stepping."""
        return self.get('solver', {})

    def get_equilibrium_config(self) -> Dict[str, Any]:
        """Get equilibrium search settings."""
        return self.get('equilibrium', {})

    def get_grid_config(self) -> Dict[str, Any]:
        """Get the default step-size grid."""
        return self.get('grid', {})

    def validate_config(self) -> bool:
        """
        Validate that numeric settings are in range.

        Returns:
            True if configuration is valid, False otherwise
        """
        problems = []
        for key in ('analysis.pf_floor', 'analysis.gy_cond_max', 'solver.newton_tol',
                    'solver.consistency_tol', 'equilibrium.tol', 'grid.hmin', 'grid.hmax'):
            value = self.get(key)
            if not isinstance(value, (int, float)) or value <= 0:
                problems.append(f"{key} must be positive (got {value!r})")
        if self.get('grid.hmin', 0) >= self.get('grid.hmax', 0):
            problems.append("grid.hmin must be smaller than grid.hmax")
        if int(self.get('grid.hpoints', 0)) < 2:
            problems.append("grid.hpoints must be at least 2")
        for key in ('analysis.n_modes', 'analysis.top_pf', 'analysis.workers',
                    'solver.max_newton', 'equilibrium.max_iter'):
            if int(self.get(key, 0)) < 1:
                problems.append(f"{key} must be at least 1")

        for problem in problems:
            logger.error(f"Invalid configuration: {problem}")
        return not problems
