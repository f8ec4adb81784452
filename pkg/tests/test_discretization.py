import math

import numpy as np
import pytest
import scipy.linalg as la

from conftest import ode_jacobians, scalar_jacobians
from src.analysis.discretization import (
    DIRK_ALPHA,
    DIRK_BETA,
    commutator_defect,
    companion_matrix,
    spectral_radius,
)
from src.analysis.sssa import reduce_state_matrix
from src.models.method_models import MethodSpec
from src.utils.exceptions import ConformanceError, ParameterError, StepSizeSingularityError


@pytest.mark.parametrize("method, expected", [
    ("bem", 1.0 / 1.1),
    ("tm", 0.95 / 1.05),
    ("theta:0.25", (1.0 - 0.025) / (1.0 + 0.075)),
    ("fem", 0.9),
    ("heun:1", 0.905),
    ("heun:2", 1.0 - 0.1 * (1.0 - 0.05 + 0.0025)),
])
def test_scalar_companion_values(method, expected):
    G = companion_matrix(MethodSpec.parse(method, h=0.1), scalar_jacobians(-1.0))
    assert G.G[0, 0] == pytest.approx(expected, rel=1e-14)
    assert (G.q, G.nu, G.mu) == (1, 1, 0)


def test_dirk_scalar_companion():
    G = companion_matrix(MethodSpec.parse("dirk2s", h=0.1), scalar_jacobians(-1.0))
    m = 1.0 + DIRK_ALPHA * 0.1
    n = 1.0 + DIRK_ALPHA * DIRK_BETA * 0.1
    assert G.G[0, 0] == pytest.approx(n / m ** 2, rel=1e-14)
    assert G.G[0, 0] == pytest.approx(0.904801, abs=1e-6)
    assert DIRK_ALPHA == pytest.approx(1.0 - 1.0 / math.sqrt(2.0))
    assert DIRK_BETA == pytest.approx(-math.sqrt(2.0))


@pytest.mark.parametrize("method", ["bem", "tm", "theta:0.47", "dirk2s", "heun:1", "heun:2"])
def test_companion_agrees_with_explicit_euler_to_first_order(stable_matrices, method):
    for A in stable_matrices:
        J = ode_jacobians(A)
        n = A.shape[0]
        defects = []
        for h in (1e-3, 5e-4, 2.5e-4):
            G = companion_matrix(MethodSpec.parse(method, h=h), J).G
            defects.append(np.linalg.norm(G - np.eye(n) - h * A))
        assert defects[0] / defects[1] == pytest.approx(4.0, abs=0.3)
        assert defects[1] / defects[2] == pytest.approx(4.0, abs=0.3)


def test_theta_companion_matches_closed_form(stable_matrices):
    A = stable_matrices[0]
    n = A.shape[0]
    h, theta = 0.05, 0.47
    G = companion_matrix(MethodSpec.parse(f"theta:{theta}", h=h), ode_jacobians(A))
    expected = la.solve(np.eye(n) - h * (1 - theta) * A, np.eye(n) + h * theta * A)
    np.testing.assert_allclose(G.G, expected, rtol=1e-12, atol=1e-14)


def test_heun_companion_on_dae_uses_f_x(smib_jacobians):
    h = 0.01
    A = reduce_state_matrix(smib_jacobians)
    f_x = smib_jacobians.f_x
    G = companion_matrix(MethodSpec.parse("heun:2", h=h), smib_jacobians)
    half = 0.5 * h * f_x
    expected = np.eye(2) + h * (A + half @ A + half @ half @ A)
    np.testing.assert_allclose(G.G, expected, rtol=1e-12)


def test_heun_does_not_commute_on_dae(smib_jacobians):
    A = reduce_state_matrix(smib_jacobians)
    G = companion_matrix(MethodSpec.parse("heun:2", h=0.01), smib_jacobians)
    assert commutator_defect(A, G) > 1e-6


@pytest.mark.parametrize("method", ["bem", "tm", "theta:0.47", "dirk2s"])
def test_implicit_methods_commute_on_dae(smib_jacobians, method):
    A = reduce_state_matrix(smib_jacobians)
    G = companion_matrix(MethodSpec.parse(method, h=0.01), smib_jacobians)
    assert commutator_defect(A, G) <= 1e-12


def test_singular_iteration_matrix_reports_eigenvalue():
    J = ode_jacobians(np.diag([10.0, -1.0]))
    with pytest.raises(StepSizeSingularityError) as excinfo:
        companion_matrix(MethodSpec.parse("bem", h=0.1), J)
    assert excinfo.value.eigenvalue == pytest.approx(10.0)


def test_companion_requires_step_size():
    with pytest.raises(ParameterError):
        companion_matrix(MethodSpec.parse("tm"), scalar_jacobians(-1.0))


def test_state_matrix_shape_checked():
    with pytest.raises(ConformanceError):
        companion_matrix(MethodSpec.parse("tm", h=0.1), scalar_jacobians(-1.0), A=np.eye(2))


def test_spectral_radius_and_commutator_edge_cases():
    assert spectral_radius(np.diag([0.5, -0.9])) == pytest.approx(0.9)
    assert commutator_defect(np.zeros((2, 2)), np.eye(2)) == 0.0
    with pytest.raises(ConformanceError):
        commutator_defect(np.eye(2), np.eye(3))
