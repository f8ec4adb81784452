"""
Small-Signal Stability Analysis

State-matrix reduction, stiffness ratio, participation factors and
damping ratios.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as la
from loguru import logger

from .dae_model import JacobianSet
from .eigen_core import Spectrum
from ..utils.exceptions import (
    DegenerateColumnError,
    SingularityError,
    UndefinedMetricError,
    UndefinedStiffnessError,
)

GY_COND_MAX = 1e12
ZERO_REL_TOL = 1e-12


def reduce_state_matrix(J: JacobianSet, cond_max: float = GY_COND_MAX) -> np.ndarray:
    """
    Eliminate the algebraic variables: A = f_x - f_y g_y^-1 g_x.

    Raises:
        SingularityError: g_y is singular or its condition estimate exceeds cond_max
    """
    if J.mu == 0:
        return J.f_x.copy()
    if not np.isfinite(J.gy_condition) or J.gy_condition > cond_max:
        raise SingularityError(
            f"g_y of {J.name} is not invertible (condition {J.gy_condition:.3e}); "
            f"algebraic variables cannot be eliminated", condition=J.gy_condition)
    return J.f_x - J.f_y @ la.solve(J.g_y, J.g_x)


def zero_modes(spectrum: Spectrum) -> np.ndarray:
    """Flags for eigenvalues that are zero up to roundoff."""
    magnitudes = np.abs(spectrum.eigenvalues)
    scale = max(1.0, float(magnitudes.max()))
    return magnitudes <= ZERO_REL_TOL * scale


def stiffness_ratio(spectrum: Spectrum) -> float:
    """
    S = max|s_i| / min|s_i| over the non-zero eigenvalues.

    Raises:
        UndefinedStiffnessError: every eigenvalue is zero
    """
    zeros = zero_modes(spectrum)
    if zeros.all():
        raise UndefinedStiffnessError("Stiffness ratio is undefined: all eigenvalues are zero")
    if zeros.any():
        logger.warning(f"{int(zeros.sum())} zero eigenvalue(s) excluded from the stiffness ratio")
    magnitudes = np.abs(spectrum.eigenvalues[~zeros])
    return float(magnitudes.max() / magnitudes.min())


@dataclass(frozen=True)
class ParticipationMatrix:
    """
    Participation factors P[k, i] = w_{i,k} v_{k,i} (rows: states, columns: modes).

    Attributes:
        P: Complex participation matrix
        normalized: Columns scaled to unit magnitude-sum
        column_norms: Sum of |P[k, i]| per column before normalization
        reliable: False when derived from a spectrum with condition_warning
    """
    P: np.ndarray
    normalized: bool = False
    column_norms: Optional[np.ndarray] = None
    reliable: bool = True

    @property
    def magnitudes(self) -> np.ndarray:
        return np.abs(self.P)


def participation_matrix(spectrum: Spectrum) -> ParticipationMatrix:
    """Unnormalized participation matrix W^T o U."""
    P = spectrum.W.T * spectrum.U
    return ParticipationMatrix(P=P, normalized=False,
                               column_norms=np.abs(P).sum(axis=0),
                               reliable=not spectrum.condition_warning)


def normalize_columns(pm: ParticipationMatrix) -> ParticipationMatrix:
    """
    Divide each column by the sum of its magnitudes.

    Raises:
        DegenerateColumnError: a column is identically zero
    """
    norms = np.abs(pm.P).sum(axis=0)
    zero = norms <= np.finfo(float).tiny
    if np.any(zero):
        raise DegenerateColumnError(
            f"Participation column(s) {np.flatnonzero(zero).tolist()} sum to zero")
    return ParticipationMatrix(P=pm.P / norms, normalized=True,
                               column_norms=norms, reliable=pm.reliable)


def damping_ratio(s: complex) -> float:
    """
    Damping ratio in percent, 100 (-Re s) / |s|.

    Raises:
        UndefinedMetricError: s = 0
    """
    magnitude = abs(s)
    if magnitude == 0:
        raise UndefinedMetricError("Damping ratio is undefined for s = 0")
    return 100.0 * (-complex(s).real) / magnitude


def damping_ratios(eigenvalues) -> np.ndarray:
    """Vectorized damping ratios; NaN where s = 0."""
    s = np.asarray(eigenvalues, dtype=complex)
    magnitude = np.abs(s)
    with np.errstate(divide="ignore", invalid="ignore"):
        zeta = np.where(magnitude > 0, 100.0 * (-s.real) / np.where(magnitude > 0, magnitude, 1.0), np.nan)
    return zeta
