"""
Exception hierarchy

Every error raised by the analysis core derives from ModeshapeError and
carries the process exit code the CLI should return for it.
"""

from typing import Any, Optional


class ModeshapeError(Exception):
    """Base class for all modeshape errors."""

    exit_code = 3

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details


class UsageError(ModeshapeError):
    """Malformed command line."""

    exit_code = 1


class ConfigError(ModeshapeError):
    """Invalid run configuration (model source, grid, thresholds)."""

    exit_code = 1


class ParameterError(ModeshapeError, ValueError):
    """Invalid model or method parameter."""

    exit_code = 1


class ConformanceError(ModeshapeError):
    """Dimension, shape or order mismatch, or non-finite input."""


class EvaluationError(ModeshapeError):
    """Model residuals became non-finite during evaluation."""


class NoEquilibriumError(ModeshapeError):
    """Newton iteration for a stationary point failed."""

    def __init__(self, message: str, residual_norm: float, **details: Any):
        super().__init__(message, residual_norm=residual_norm, **details)
        self.residual_norm = residual_norm


class SingularityError(ModeshapeError):
    """g_y is not invertible, so algebraic variables cannot be eliminated."""


class StepSizeSingularityError(ModeshapeError):
    """The implicit iteration matrix of a method is singular at this step size."""

    def __init__(self, message: str, eigenvalue: float, **details: Any):
        super().__init__(message, eigenvalue=eigenvalue, **details)
        self.eigenvalue = eigenvalue


class UndefinedMetricError(ModeshapeError):
    """A metric is undefined for the given input (e.g. damping of s = 0)."""


class UndefinedStiffnessError(UndefinedMetricError):
    """Every eigenvalue is zero, the stiffness ratio is undefined."""


class DegenerateColumnError(ModeshapeError):
    """A participation column sums to zero and cannot be normalized."""


class NewtonError(ModeshapeError):
    """Newton iteration of an integration step did not converge."""

    def __init__(self, message: str, trace: Optional[list] = None,
                 stage: Optional[str] = None, **details: Any):
        super().__init__(message, trace=trace or [], stage=stage, **details)
        self.trace = trace or []
        self.stage = stage


class InitializationError(ModeshapeError):
    """Initial algebraic variables are inconsistent with the states."""


class ModelFileError(ModeshapeError):
    """A linear model file could not be read, parsed or validated."""


class ModelFileAccessError(ModelFileError):
    """A linear model file could not be opened or read."""

    exit_code = 4


class OutputError(ModeshapeError):
    """An output file could not be written."""

    exit_code = 4
