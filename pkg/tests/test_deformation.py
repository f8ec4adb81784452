import itertools
import math
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest
import scipy.linalg as la

from conftest import ode_jacobians, scalar_jacobians
from src.analysis.dae_model import builtin_smib3, builtin_stiff_chain, find_equilibrium, jacobians
from src.analysis.deformation import (
    SWEEP_COLUMNS,
    TABLE_SCENARIOS,
    DeformationReport,
    HmaxResult,
    LinearAnalysis,
    critical_modes,
    deformation_report,
    eig_deformation,
    hmax,
    hmax_table,
    pair_modes,
    pf_deformation,
    stiffness_experiment,
    sweep,
    top_states,
)
from src.analysis.discretization import companion_matrix
from src.analysis.eigen_core import eig_full
from src.analysis.sssa import normalize_columns, participation_matrix, reduce_state_matrix
from src.models.method_models import MethodSpec
from src.utils.exceptions import ConformanceError, ParameterError


def _report(J, method, h, **kwargs) -> DeformationReport:
    return deformation_report(J, MethodSpec.parse(method, h=h), **kwargs)


def test_backward_euler_scalar_deformation():
    report = _report(scalar_jacobians(-1.0), "bem", 0.1)
    assert report.eps_s[0] == pytest.approx(100.0 * abs(-1.0 + math.log(1.1) / 0.1), abs=1e-10)
    assert report.eps_s[0] == pytest.approx(4.6898, abs=1e-4)
    assert report.eps_p[0, 0] == pytest.approx(0.0, abs=1e-12)
    assert report.stable
    assert report.s_hat[0].real == pytest.approx(-math.log(1.1) / 0.1)


def test_trapezoidal_scalar_deformation():
    report = _report(scalar_jacobians(-1.0), "tm", 0.1)
    expected = 100.0 * abs(-1.0 - math.log(0.95 / 1.05) / 0.1)
    assert report.eps_s[0] == pytest.approx(expected, abs=1e-10)
    assert report.eps_s[0] == pytest.approx(0.083459, abs=1e-5)


def test_exact_map_has_no_eigenvalue_deformation(stable_matrices):
    h = 0.05
    for A in stable_matrices[:5]:
        spec_A = eig_full(A)
        spec_G = eig_full(la.expm(h * A))
        pairing = pair_modes(spec_A, spec_G, h)
        eps = eig_deformation(pairing, spec_A, spec_G, h)
        assert np.all(eps <= 1e-10)


def test_pairing_recovers_permuted_spectrum():
    h = 0.1
    spec_A = eig_full(np.diag([-1.0, -2.0, -3.0]))
    spec_G = eig_full(np.diag(np.exp(h * np.array([-3.0, -1.0, -2.0]))))
    pairing = pair_modes(spec_A, spec_G, h)
    np.testing.assert_allclose(spec_G.eigenvalues[pairing.perm], np.exp(h * spec_A.eigenvalues.real))
    assert pairing.cost == pytest.approx(0.0, abs=1e-12)
    assert len(pairing.pairs) == 3


def test_pairing_requires_equal_orders():
    with pytest.raises(ConformanceError):
        pair_modes(eig_full(np.eye(2)), eig_full(np.eye(3)), 0.1)


def test_pairing_cost_is_minimal_over_all_permutations():
    rng = np.random.default_rng(29)
    h = 0.1
    for n in (2, 3, 4, 5, 6):
        for _ in range(3):
            spec_A = eig_full(rng.standard_normal((n, n)))
            spec_G = eig_full(rng.standard_normal((n, n)))
            target = np.exp(spec_A.eigenvalues * h)
            brute = min(float(np.abs(target - spec_G.eigenvalues[list(perm)]).sum())
                        for perm in itertools.permutations(range(n)))
            pairing = pair_modes(spec_A, spec_G, h)
            assert pairing.cost == pytest.approx(brute, rel=1e-10, abs=1e-14)
            assert sorted(pairing.perm.tolist()) == list(range(n))


def test_close_discrete_eigenvalues_do_not_mark_modes_degenerate():
    A = np.array([[-1.0, 3.0], [0.0, -1.005]])
    h = 1e-4
    method = MethodSpec.parse("heun:2", h=h)
    spec_A = eig_full(A)
    spec_G = eig_full(companion_matrix(method, ode_jacobians(A)).G)
    assert not spec_A.has_degenerate
    assert spec_G.has_degenerate

    assert not pair_modes(spec_A, spec_G, h).degenerate.any()
    report = deformation_report(ode_jacobians(A), method)
    assert not report.degenerate.any()
    assert "degenerate" not in ";".join(report.to_frame()["flags"])


def test_aliasing_flag():
    A = np.array([[-0.1, 40.0], [-40.0, -0.1]])
    report = _report(ode_jacobians(A), "tm", 0.1)
    assert report.aliased.all()
    assert "aliased" in report.mode_flags(0)
    assert "aliased modes present" in report.warnings


def test_pf_deformation_requires_same_normalization():
    spectrum = eig_full(np.array([[0.0, 1.0], [-2.0, -3.0]]))
    raw = participation_matrix(spectrum)
    pairing = pair_modes(spectrum, spectrum, 1e-3)
    with pytest.raises(ConformanceError):
        pf_deformation(normalize_columns(raw), raw, pairing)


def test_eigenvector_rescaling_leaves_mode_shape_deformation_unchanged():
    model = builtin_smib3()
    point = find_equilibrium(model)
    J = jacobians(model, point.x_o, point.y_o)
    h = 0.01
    spec_A = eig_full(reduce_state_matrix(J))
    spec_G = eig_full(companion_matrix(MethodSpec.parse("heun:2", h=h), J).G)
    pairing = pair_modes(spec_A, spec_G, h)

    rng = np.random.default_rng(41)

    def rescaled(spectrum):
        c = rng.uniform(0.2, 5.0, spectrum.order) * np.exp(2j * np.pi * rng.uniform(size=spectrum.order))
        return replace(spectrum, U=spectrum.U * c, W=spectrum.W / c[:, None])

    def eps_p(sa, sg):
        P_hat = normalize_columns(participation_matrix(sa))
        Pi_hat = normalize_columns(participation_matrix(sg))
        return P_hat, pf_deformation(P_hat, Pi_hat, pairing, sa, sg).eps_p

    P_hat, baseline = eps_p(spec_A, spec_G)
    P_scaled, scaled = eps_p(rescaled(spec_A), rescaled(spec_G))
    np.testing.assert_allclose(P_scaled.P, P_hat.P, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(scaled, baseline, rtol=1e-8, atol=1e-9, equal_nan=True)
    assert np.nanmax(np.abs(baseline)) > 0.01


def test_negligible_participation_is_flagged():
    report = _report(ode_jacobians(np.diag([-1.0, -5.0])), "heun:2", 0.01)
    assert report.low_pf.tolist() == [[False, True], [True, False]]
    assert np.isnan(report.eps_p[0, 1])
    frame = report.to_frame()
    assert frame.loc[(frame.mode_id == 0) & (frame.state_id == 1), "flags"].item() == "low_pf"


@pytest.mark.parametrize("method", ["bem", "tm", "theta:0.47", "dirk2s"])
def test_implicit_methods_preserve_mode_shapes(method):
    model = builtin_smib3()
    point = find_equilibrium(model)
    J = jacobians(model, point.x_o, point.y_o)
    report = _report(J, method, 0.01)
    defined = np.isfinite(report.eps_p)
    assert defined.any()
    assert np.max(np.abs(report.eps_p[defined])) <= 1e-7
    assert report.commutator_defect <= 1e-12


def test_heun_deforms_mode_shapes_of_flux_decay_model():
    model = builtin_smib3()
    point = find_equilibrium(model)
    J = jacobians(model, point.x_o, point.y_o)
    report = _report(J, "heun:2", 0.01)
    assert report.max_abs_eps_p(range(3), 3) > 1e-3
    assert report.commutator_defect > 1e-6


def test_two_state_oscillator_mode_shapes_cannot_deform(smib_jacobians):
    report = _report(smib_jacobians, "heun:2", 0.01)
    assert np.nanmax(np.abs(report.eps_p)) <= 1e-9
    assert report.commutator_defect > 1e-6


def test_critical_modes_order():
    spectrum = eig_full(np.diag([-5.0, -1.0, -3.0]))
    # all damping ratios are 100 %, ties broken by |s|
    assert critical_modes(spectrum, 2).tolist() == [0, 1]
    assert spectrum.eigenvalues[critical_modes(spectrum, 5)].real.tolist() == [-1.0, -3.0, -5.0]


def test_critical_modes_prefer_low_damping():
    A = np.zeros((3, 3))
    A[0, 0] = -10.0
    A[1:, 1:] = [[-0.1, 5.0], [-5.0, -0.1]]
    spectrum = eig_full(A)
    chosen = critical_modes(spectrum, 2)
    assert spectrum.eigenvalues[chosen].real.tolist() == pytest.approx([-0.1, -0.1])


def test_top_states_ties_by_index():
    base = LinearAnalysis.from_jacobians(ode_jacobians(np.array([[0.0, 1.0], [-2.0, -3.0]])))
    assert top_states(base.participation, 0, 1).tolist() == [0]
    assert top_states(base.participation, 1, 5).tolist() == [1, 0]


def test_sweep_row_layout(smib_jacobians):
    grid = np.geomspace(1e-3, 1e-1, 4)
    frame = sweep(smib_jacobians, MethodSpec.parse("heun:2"), grid, state_names=("delta", "omega"))
    assert list(frame.columns) == SWEEP_COLUMNS
    assert len(frame) == 4 * 2 * 2
    assert frame["h"].tolist() == sorted(frame["h"].tolist())
    assert set(frame["state"]) == {"delta", "omega"}


def test_sweep_parallel_matches_serial(smib_jacobians):
    grid = np.geomspace(1e-3, 1e-1, 6)
    serial = sweep(smib_jacobians, MethodSpec.parse("dirk2s"), grid)
    parallel = sweep(smib_jacobians, MethodSpec.parse("dirk2s"), grid, workers=3)
    pd.testing.assert_frame_equal(serial, parallel)


def test_sweep_empty_grid():
    frame = sweep(scalar_jacobians(-1.0), MethodSpec.parse("tm"), [])
    assert frame.empty
    assert list(frame.columns) == SWEEP_COLUMNS


def test_sweep_marks_failed_grid_points():
    J = ode_jacobians(np.diag([10.0, -1.0]))
    frame = sweep(J, MethodSpec.parse("bem"), [0.05, 0.1])
    failed = frame[frame["h"] == 0.1]
    assert len(failed) == 4
    assert (failed["flags"] == "failed").all()
    assert failed["eps_s_pct"].isna().all()
    assert not frame[frame["h"] == 0.05]["flags"].str.contains("failed").any()


def test_sweep_rejects_descending_grid(smib_jacobians):
    with pytest.raises(ParameterError):
        sweep(smib_jacobians, MethodSpec.parse("tm"), [0.1, 0.01])


def test_hmax_unbounded_for_implicit_methods(smib_jacobians):
    grid = np.geomspace(1e-4, 1e-1, 10)
    for method in ("theta:0.47", "tm", "dirk2s"):
        result = hmax(smib_jacobians, MethodSpec.parse(method), grid, eps_p_max=5.0)
        assert result.status == "unbounded"
        assert result.hmax == math.inf
        assert result.to_dict()["hmax"] == "infinity"


def test_hmax_bounded_by_eigenvalue_criterion(smib_jacobians):
    grid = np.geomspace(1e-4, 1e-1, 30)
    result = hmax(smib_jacobians, MethodSpec.parse("heun:2"), grid, eps_s_max=5.0)
    assert result.status == "bounded"
    index = int(np.flatnonzero(grid == result.hmax)[0])
    assert result.first_failure_h == grid[index + 1]
    assert result.limiting_metric == "eps_s"
    assert result.to_dict()["limiting_mode"]["re"] < 0


def test_hmax_below_grid(smib_jacobians):
    result = hmax(smib_jacobians, MethodSpec.parse("heun:2"), [0.01, 0.02], eps_s_max=1e-6)
    assert result.status == "below-grid"
    assert result.hmax == 0.0
    assert result.first_failure_h == 0.01
    assert result.to_dict()["hmax"] == "below-grid"


def test_hmax_parameter_errors(smib_jacobians):
    method = MethodSpec.parse("tm")
    with pytest.raises(ParameterError):
        hmax(smib_jacobians, method, [0.01, 0.02])
    with pytest.raises(ParameterError):
        hmax(smib_jacobians, method, [], eps_s_max=5.0)
    with pytest.raises(ParameterError):
        hmax(smib_jacobians, method, [0.01], eps_s_max=-1.0)


def test_hmax_table_matches_individual_searches(smib_jacobians):
    grid = np.geomspace(1e-4, 1e-1, 12)
    method = MethodSpec.parse("heun:1")
    table = hmax_table(smib_jacobians, method, grid)
    assert len(table) == len(TABLE_SCENARIOS)
    for scenario, result in zip(TABLE_SCENARIOS, table):
        single = hmax(smib_jacobians, method, grid, eps_s_max=scenario.get("eps_s"),
                      eps_p_max=scenario.get("eps_p"))
        assert isinstance(result, HmaxResult)
        assert result.hmax == single.hmax
        assert result.status == single.status


def test_stiffness_experiment_increases_mode_shape_deformation():
    base = builtin_stiff_chain(n_slow=1, n_fast=1, s_min=-1.0, s_max=-100.0, coupling=50.0)
    stiff = builtin_stiff_chain(n_slow=1, n_fast=1, s_min=-1.0, s_max=-1000.0, coupling=50.0)
    J_base = jacobians(base, np.zeros(2), np.zeros(1))
    J_stiff = jacobians(stiff, np.zeros(2), np.zeros(1))
    grid = np.geomspace(1e-4, 1e-2, 5)
    result = stiffness_experiment(J_base, J_stiff, MethodSpec.parse("heun:2"), grid)
    assert list(result.frame.columns) == ["h", "max_eps_p_base", "max_eps_p_modified"]
    assert result.stiffness_modified > result.stiffness_base
    first = result.frame.iloc[0]
    assert first["max_eps_p_base"] > 0
    assert first["max_eps_p_modified"] > first["max_eps_p_base"]
