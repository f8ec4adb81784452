"""
Shared fixtures: the single-machine infinite-bus model, its equilibrium
and Jacobians, and a factory for random stable diagonalizable matrices.
"""

import math

import numpy as np
import pytest

from src.analysis.dae_model import JacobianSet, builtin_smib, find_equilibrium, jacobians

# Eigenvalue pool with pairwise distance >= 1 and |s| <= 2.5
REAL_POOL = (-0.5, -1.5, -2.5)
PAIR_POOL = ((-0.5, 1.0), (-1.5, 1.0), (-0.5, 2.0), (-1.5, 2.0))

SMIB_DELTA = math.asin(0.4)


@pytest.fixture
def smib():
    return builtin_smib()


@pytest.fixture
def smib_point(smib):
    return find_equilibrium(smib)


@pytest.fixture
def smib_jacobians(smib, smib_point):
    return jacobians(smib, smib_point.x_o, smib_point.y_o)


def scalar_jacobians(a: float) -> JacobianSet:
    """Pure ODE x' = a x."""
    return JacobianSet(f_x=[[a]], f_y=np.zeros((1, 0)), g_x=np.zeros((0, 1)),
                       g_y=np.zeros((0, 0)), x_o=[0.0], y_o=np.zeros(0), name="scalar")


def ode_jacobians(A: np.ndarray) -> JacobianSet:
    n = A.shape[0]
    return JacobianSet(f_x=A, f_y=np.zeros((n, 0)), g_x=np.zeros((0, n)),
                       g_y=np.zeros((0, 0)), x_o=np.zeros(n), y_o=np.zeros(0), name="random")


def _orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def random_stable_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    """
    Real A = T D T^-1 with distinct stable eigenvalues from the pool and cond(T) <= 2.
    """
    n_pairs = int(rng.integers(max(0, n - len(REAL_POOL)) // 2 + (max(0, n - len(REAL_POOL)) % 2),
                               min(len(PAIR_POOL), n // 2) + 1))
    n_real = n - 2 * n_pairs
    reals = rng.choice(REAL_POOL, size=n_real, replace=False)
    pairs = [PAIR_POOL[k] for k in rng.choice(len(PAIR_POOL), size=n_pairs, replace=False)]

    D = np.zeros((n, n))
    for k, value in enumerate(reals):
        D[k, k] = value
    for j, (re, im) in enumerate(pairs):
        k = n_real + 2 * j
        D[k:k + 2, k:k + 2] = [[re, im], [-im, re]]

    scales = rng.uniform(1.0, 2.0, size=n)
    T = _orthogonal(rng, n) @ np.diag(scales) @ _orthogonal(rng, n)
    return T @ D @ np.linalg.inv(T)


@pytest.fixture
def stable_matrices():
    """Twenty random stable diagonalizable matrices, sizes 2..8, fixed seed."""
    rng = np.random.default_rng(20240611)
    return [random_stable_matrix(rng, int(rng.integers(2, 9))) for _ in range(20)]
