"""
Discretization

Companion matrices G of the linearized difference equations
x_{n+1} = G x_n for the Theta family, 2S-DIRK and Heun's method.
"""

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import scipy.linalg as la

from .dae_model import JacobianSet
from .sssa import reduce_state_matrix
from ..models.method_models import MethodKind, MethodSpec
from ..utils.exceptions import ConformanceError, StepSizeSingularityError

DIRK_ALPHA = 1.0 - 1.0 / math.sqrt(2.0)
DIRK_BETA = -math.sqrt(2.0)


@dataclass(frozen=True)
class CompanionMatrix:
    """One-step map of a method applied to the linearized model."""
    G: np.ndarray
    method: MethodSpec
    nu: int
    mu: int

    @property
    def q(self) -> int:
        return self.nu

    @property
    def h(self) -> float:
        return self.method.require_step()


def _checked_solve(M: np.ndarray, B: np.ndarray, eigenvalue: float, label: str) -> np.ndarray:
    if np.linalg.cond(M) > 1.0 / np.finfo(float).eps:
        raise StepSizeSingularityError(
            f"{label}: iteration matrix is singular, A has an eigenvalue at {eigenvalue:.6g}",
            eigenvalue=eigenvalue)
    return la.solve(M, B)


def companion_matrix(method: MethodSpec, J: JacobianSet,
                     A: Optional[np.ndarray] = None) -> CompanionMatrix:
    """
    Build the companion matrix G of a method at its step size.

    Theta(theta): G = [I - h(1-theta)A]^-1 (I + h theta A)
    DIRK2S:       G = (I - alpha h A)^-1 (I - alpha beta h A)(I - alpha h A)^-1
    Heun(r):      G = I + h sum_{j=0..r} ((h/2) f_x)^j A

    Args:
        method: Method with a bound step size
        J: Jacobians of the model (Heun uses f_x directly)
        A: Reduced state matrix; computed from J when omitted

    Raises:
        StepSizeSingularityError: the implicit iteration matrix is singular
    """
    h = method.require_step()
    if A is None:
        A = reduce_state_matrix(J)
    A = np.asarray(A, dtype=float)
    if A.shape != (J.nu, J.nu):
        raise ConformanceError(f"A has shape {A.shape}, expected {(J.nu, J.nu)}")

    identity = np.eye(J.nu)
    spec = method.resolved()
    if spec.kind is MethodKind.THETA:
        theta = spec.theta
        M = identity - h * (1.0 - theta) * A
        N = identity + h * theta * A
        G = _checked_solve(M, N, 1.0 / (h * (1.0 - theta)), method.label)
    elif spec.kind is MethodKind.DIRK2S:
        M = identity - DIRK_ALPHA * h * A
        N = identity - DIRK_ALPHA * DIRK_BETA * h * A
        left = _checked_solve(M, N, 1.0 / (DIRK_ALPHA * h), method.label)
        # left M^-1 computed as (M^-T left^T)^T
        G = la.solve(M.T, left.T).T
    elif spec.kind is MethodKind.HEUN:
        term = A.copy()
        total = A.copy()
        half_fx = 0.5 * h * J.f_x
        for _ in range(spec.r):
            term = half_fx @ term
            total = total + term
        G = identity + h * total
    else:
        raise ConformanceError(f"Unsupported method {method.label}")

    return CompanionMatrix(G=G, method=method, nu=J.nu, mu=J.mu)


def _matrix(value: Union[CompanionMatrix, np.ndarray]) -> np.ndarray:
    return value.G if isinstance(value, CompanionMatrix) else np.asarray(value)


def commutator_defect(A: np.ndarray, G: Union[CompanionMatrix, np.ndarray]) -> float:
    """Relative commutator ||AG - GA||_F / (||A||_F ||G||_F); 0 when a norm vanishes."""
    A = np.asarray(A)
    G = _matrix(G)
    if A.shape != G.shape:
        raise ConformanceError(f"Cannot commute shapes {A.shape} and {G.shape}")
    denominator = np.linalg.norm(A, "fro") * np.linalg.norm(G, "fro")
    if denominator == 0:
        return 0.0
    return float(np.linalg.norm(A @ G - G @ A, "fro") / denominator)


def spectral_radius(G: Union[CompanionMatrix, np.ndarray]) -> float:
    """max |z| over the eigenvalues of G."""
    return float(np.max(np.abs(la.eigvals(_matrix(G)))))
