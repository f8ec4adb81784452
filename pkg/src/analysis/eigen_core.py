"""
Eigen Core

Dense eigendecomposition with right and left eigenvectors. Right vectors
are unit-normalized columns of U and the left vectors are the rows of
W = U^-1, so that W U = I and every w_i v_i = 1.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import scipy.linalg as la
from loguru import logger
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ..utils.exceptions import ConformanceError

RESIDUAL_REL_TOL = 1e-8
COND_WARNING = 1e10
CLUSTER_REL_TOL = 1e-6
SORT_DIGITS = 10


@dataclass(frozen=True)
class Spectrum:
    """
    Eigenvalues with biorthonormal right/left eigenvectors.

    Attributes:
        eigenvalues: n complex eigenvalues, descending real part then
            descending imaginary part
        U: Right eigenvectors as columns (unit 2-norm)
        W: Left eigenvectors as rows, W = U^-1
        residuals: max of right and left residual 2-norms per eigenvalue
        degeneracy: Cluster label per eigenvalue
        condition_warning: U is near-singular or a residual exceeds 1e-8 ||A||_F
        matrix_norm: Frobenius norm of the decomposed matrix
    """
    eigenvalues: np.ndarray
    U: np.ndarray
    W: np.ndarray
    residuals: np.ndarray
    degeneracy: np.ndarray
    condition_warning: bool = False
    matrix_norm: float = 0.0

    @property
    def order(self) -> int:
        return self.eigenvalues.size

    @property
    def cluster_sizes(self) -> np.ndarray:
        """Size of the cluster each eigenvalue belongs to."""
        counts = np.bincount(self.degeneracy)
        return counts[self.degeneracy]

    @property
    def degenerate(self) -> np.ndarray:
        """Per-eigenvalue flag: True when it shares a cluster with another eigenvalue."""
        return self.cluster_sizes > 1

    @property
    def has_degenerate(self) -> bool:
        return bool(np.any(self.degenerate))


def _sort_order(eigenvalues: np.ndarray) -> np.ndarray:
    # Rounded keys keep conjugate pairs with roundoff-level real parts adjacent
    scale = max(1.0, float(np.max(np.abs(eigenvalues)))) if eigenvalues.size else 1.0
    real_key = np.round(eigenvalues.real / scale, SORT_DIGITS)
    imag_key = np.round(eigenvalues.imag / scale, SORT_DIGITS)
    return np.lexsort((-imag_key, -real_key))


def eig_full(A, cluster_tol: Optional[float] = None, cluster_rel_tol: float = CLUSTER_REL_TOL) -> Spectrum:
    """
    Compute the complete spectrum of A with right and left eigenvectors.

    Left eigenvectors are the rows of U^-1. When U is numerically singular
    (defective or near-defective A) a pseudo-inverse is used and the
    spectrum carries condition_warning.

    Args:
        A: Square real or complex matrix
        cluster_tol: Absolute clustering tolerance; cluster_rel_tol max(1, max|s|) when omitted
        cluster_rel_tol: Relative clustering tolerance

    Raises:
        ConformanceError: A is not square, empty, or not finite
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ConformanceError(f"eig_full needs a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ConformanceError("eig_full input contains non-finite entries")

    n = A.shape[0]
    eigenvalues, U = la.eig(A)
    order = _sort_order(eigenvalues)
    eigenvalues = eigenvalues[order]
    U = U[:, order]
    U = U / np.linalg.norm(U, axis=0)

    warning = False
    if np.linalg.cond(U) > COND_WARNING:
        warning = True
        W = la.pinv(U)
    else:
        try:
            W = la.solve(U, np.eye(n, dtype=U.dtype))
        except la.LinAlgError:
            warning = True
            W = la.pinv(U)

    right = np.linalg.norm(A @ U - U * eigenvalues, axis=0)
    left = np.linalg.norm(W @ A - eigenvalues[:, None] * W, axis=1)
    residuals = np.maximum(right, left)
    norm = float(np.linalg.norm(A, "fro"))
    if np.any(residuals > RESIDUAL_REL_TOL * max(norm, np.finfo(float).tiny)):
        warning = True
    if warning:
        logger.warning(f"Eigenvector matrix is ill-conditioned (n={n}); "
                       f"participation factors may be unreliable")

    spectrum = Spectrum(eigenvalues=eigenvalues, U=U, W=W, residuals=residuals,
                        degeneracy=np.arange(n), condition_warning=warning, matrix_norm=norm)
    return cluster_degenerate(spectrum, cluster_tol, cluster_rel_tol)


def cluster_degenerate(spectrum: Spectrum, tol: Optional[float] = None,
                       rel_tol: float = CLUSTER_REL_TOL) -> Spectrum:
    """
    Label eigenvalues that coincide within tol (transitive closure).

    Labels are numbered in order of first appearance in the sorted spectrum.
    """
    s = spectrum.eigenvalues
    if tol is None:
        tol = rel_tol * max(1.0, float(np.max(np.abs(s))))
    adjacency = np.abs(s[:, None] - s[None, :]) <= tol
    _, raw = connected_components(csr_matrix(adjacency), directed=False)

    labels = np.empty_like(raw)
    mapping = {}
    for i, label in enumerate(raw):
        labels[i] = mapping.setdefault(label, len(mapping))

    if len(mapping) < s.size:
        logger.debug(f"{s.size - len(mapping)} eigenvalue(s) merged into degenerate clusters")
    return replace(spectrum, degeneracy=labels)
