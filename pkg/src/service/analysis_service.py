"""
Analysis Service Module

Orchestrates model resolution, linearization and the analysis commands
(analyze, deform, sweep, hmax, simulate, export) for the CLI and the API.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from ..analysis.dae_model import (
    DaeModel,
    JacobianSet,
    build_builtin,
    find_equilibrium,
    jacobian_to_dict,
    jacobians,
    linear_dae,
    load_linear_model,
    parse_linear_model,
    solve_algebraic,
)
from ..analysis.deformation import (
    TABLE_SCENARIOS,
    DeformationReport,
    HmaxResult,
    LinearAnalysis,
    deformation_report,
    hmax,
    hmax_table,
    sweep,
)
from ..analysis.discretization import companion_matrix, spectral_radius
from ..analysis.simulator import Trajectory, simulate
from ..analysis.sssa import damping_ratios, reduce_state_matrix, stiffness_ratio, zero_modes
from ..models.method_models import MethodSpec, SolverConfig
from ..models.request_models import RunConfig
from ..utils.exceptions import ConfigError, ModeshapeError, ParameterError, UsageError
from .config import Config


@dataclass
class ResolvedModel:
    """A model source resolved to its Jacobians (and nonlinear model when available)."""
    J: JacobianSet
    model: DaeModel
    state_names: Tuple[str, ...]
    algebraic_names: Tuple[str, ...]
    builtin: bool
    x_start: np.ndarray
    y_start: np.ndarray


@dataclass
class AnalysisResult:
    """Eigen-analysis of a linearized model."""
    eigenvalues: pd.DataFrame
    participation: pd.DataFrame
    stiffness: Optional[float]
    stable: bool
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "eigenvalues": self.eigenvalues.to_dict(orient="records"),
            "participation": self.participation.to_dict(orient="records"),
            "stiffness_ratio": self.stiffness,
            "stable": self.stable,
            "warnings": self.warnings,
        }

    def summary(self) -> Dict[str, Any]:
        """Scalar results that have no place in the eigenvalue table."""
        return {
            "n_modes": len(self.eigenvalues),
            "stiffness_ratio": self.stiffness,
            "stable": self.stable,
            "warnings": self.warnings,
        }


class AnalysisService:
    """
    Service class running one analysis command.

    Resolves RunConfig fields against the configuration file defaults
    (CLI flag > environment > config.yaml > built-in default).
    """

    def __init__(self, run: RunConfig, settings: Optional[Config] = None):
        """
        Initialize the analysis service.

        Args:
            run: Validated run configuration
            settings: Configuration manager (config.yaml or MODESHAPE_CONFIG when omitted)
        """
        self.run = run
        self.settings = settings or Config()
        self.logger = logger
        analysis = self.settings.get_analysis_config()
        self.n_modes = run.n_modes or int(analysis.get('n_modes', 5))
        self.top_pf = run.top_pf or int(analysis.get('top_pf', 3))
        self.pf_floor = run.pf_floor or float(analysis.get('pf_floor', 1e-3))
        self.workers = run.workers or int(analysis.get('workers', 1))
        self.gy_cond_max = float(analysis.get('gy_cond_max', 1e12))
        self.cluster_rel_tol = float(analysis.get('cluster_rel_tol', 1e-6))
        self.digits = int(analysis.get('float_digits', 12))
        self._resolved: Optional[ResolvedModel] = None

    # ------------------------------------------------------------------
    # Model resolution
    # ------------------------------------------------------------------

    def resolve_model(self) -> ResolvedModel:
        """
        Build the model and its Jacobians.

        Built-in models are linearized at their equilibrium; linear models
        are used as given, with deviation variables starting at zero.
        """
        if self._resolved is not None:
            return self._resolved

        run = self.run
        if run.model is not None:
            model = build_builtin(run.model, run.params)
            eq_cfg = self.settings.get_equilibrium_config()
            point = find_equilibrium(model, tol=float(eq_cfg.get('tol', 1e-10)),
                                     max_iter=int(eq_cfg.get('max_iter', 50)))
            J = jacobians(model, point.x_o, point.y_o)
            self.logger.info(f"Linearized {model.name} at equilibrium "
                             f"(residual {point.residual_norm:.2e}, {point.iterations} iterations)")
            resolved = ResolvedModel(J=J, model=model, state_names=model.state_names,
                                     algebraic_names=model.algebraic_names, builtin=True,
                                     x_start=point.x_o.copy(), y_start=point.y_o.copy())
        else:
            if run.params:
                raise ConfigError("Model parameters only apply to built-in models")
            if run.linear is not None:
                J = load_linear_model(run.linear)
            else:
                J = parse_linear_model(run.jacobian, default_name="inline")
            model = linear_dae(J)
            resolved = ResolvedModel(J=J, model=model, state_names=model.state_names,
                                     algebraic_names=model.algebraic_names, builtin=False,
                                     x_start=np.zeros(J.nu), y_start=np.zeros(J.mu))
        self._resolved = resolved
        return resolved

    def linear_analysis(self) -> LinearAnalysis:
        resolved = self.resolve_model()
        A = reduce_state_matrix(resolved.J, cond_max=self.gy_cond_max)
        return LinearAnalysis.from_jacobians(resolved.J, A, cluster_rel_tol=self.cluster_rel_tol)

    def method(self, require_step: bool = False) -> MethodSpec:
        spec = self.run.method_spec()
        if require_step and spec.h is None:
            raise UsageError(f"--h is required for {spec.label}")
        return spec

    def h_grid(self) -> np.ndarray:
        """Explicit grid when given, otherwise log-spaced between hmin and hmax."""
        if self.run.hgrid is not None:
            if len(self.run.hgrid) < 2:
                raise ConfigError("A step-size grid needs at least 2 points")
            return np.asarray(self.run.hgrid, dtype=float)
        grid_cfg = self.settings.get_grid_config()
        hmin = self.run.hmin or float(grid_cfg.get('hmin', 1e-4))
        hmax_value = self.run.hmax or float(grid_cfg.get('hmax', 1e-1))
        points = self.run.hpoints or int(grid_cfg.get('hpoints', 20))
        if hmin >= hmax_value:
            raise ConfigError(f"hmin ({hmin}) must be smaller than hmax ({hmax_value})")
        if points < 2:
            raise ConfigError("A step-size grid needs at least 2 points")
        return np.geomspace(hmin, hmax_value, points)

    def solver_config(self, h: Optional[float] = None) -> SolverConfig:
        solver = self.settings.get_solver_config()
        return SolverConfig(newton_tol=float(solver.get('newton_tol', 1e-12)),
                            max_newton=int(solver.get('max_newton', 25)),
                            consistency_tol=float(solver.get('consistency_tol', 1e-8)),
                            h=h)

    # ------------------------------------------------------------------
    # Commands
    # ------------------------------------------------------------------

    def analyze(self) -> AnalysisResult:
        """Eigenvalues, damping, stiffness ratio and normalized participation matrix."""
        resolved = self.resolve_model()
        base = self.linear_analysis()
        spectrum = base.spectrum
        s = spectrum.eigenvalues
        warnings: List[str] = []

        eigen_frame = pd.DataFrame({
            "mode": np.arange(1, s.size + 1),
            "re": s.real,
            "im": s.imag,
            "abs": np.abs(s),
            "zeta_pct": damping_ratios(s),
            "cluster": spectrum.degeneracy,
        })
        participation = pd.DataFrame(
            base.participation.magnitudes,
            columns=[f"mode_{i + 1}" for i in range(s.size)])
        participation.insert(0, "state", list(resolved.state_names))

        stiffness = None
        if zero_modes(spectrum).all():
            warnings.append("stiffness ratio undefined: all eigenvalues are zero")
        else:
            if zero_modes(spectrum).any():
                warnings.append("zero eigenvalues excluded from the stiffness ratio")
            stiffness = stiffness_ratio(spectrum)
        if spectrum.condition_warning:
            warnings.append("eigenvectors ill-conditioned; participation factors unreliable")
        if spectrum.has_degenerate:
            warnings.append("degenerate eigenvalues present")

        stable = bool(np.all(s.real < 0))
        if not stable:
            self.logger.warning(f"{resolved.J.name} is not small-signal stable "
                                f"(max Re s = {s.real.max():.6g})")
        return AnalysisResult(eigenvalues=eigen_frame, participation=participation,
                              stiffness=stiffness, stable=stable, warnings=warnings)

    def deform(self) -> DeformationReport:
        """Deformation report at the configured step size."""
        method = self.method(require_step=True)
        base = self.linear_analysis()
        report = deformation_report(self.resolve_model().J, method, base=base,
                                    pf_floor=self.pf_floor)
        for warning in report.warnings:
            self.logger.warning(warning)
        return report

    def sweep(self) -> pd.DataFrame:
        """Long-format sweep over the step-size grid."""
        resolved = self.resolve_model()
        base = self.linear_analysis()
        return sweep(resolved.J, self.method(), self.h_grid(), top_k_pf=self.top_pf,
                     n_modes=self.n_modes, pf_floor=self.pf_floor, workers=self.workers,
                     state_names=resolved.state_names, A=base.A)

    def hmax(self) -> List[HmaxResult]:
        """Maximum admissible step for the configured thresholds or the standard table."""
        run = self.run
        resolved = self.resolve_model()
        base = self.linear_analysis()
        grid = self.h_grid()
        method = self.method()
        if run.table:
            return hmax_table(resolved.J, method, grid, scenarios=TABLE_SCENARIOS,
                              n_modes=self.n_modes, top_k_pf=self.top_pf,
                              pf_floor=self.pf_floor, A=base.A)
        if run.eps_s is None and run.eps_p is None:
            raise UsageError("hmax needs --eps-s, --eps-p or --table")
        return [hmax(resolved.J, method, grid, eps_s_max=run.eps_s, eps_p_max=run.eps_p,
                     n_modes=self.n_modes, top_k_pf=self.top_pf, pf_floor=self.pf_floor,
                     A=base.A)]

    def initial_state(self) -> Tuple[np.ndarray, np.ndarray]:
        """Start point with perturbations applied and algebraic variables re-solved."""
        resolved = self.resolve_model()
        x0 = resolved.x_start.copy()
        for name, delta in self.run.perturb.items():
            x0[self._state_index(name, resolved.state_names)] += delta
        y0 = resolved.y_start.copy()
        if self.run.perturb and resolved.J.mu:
            solver = self.solver_config()
            y0 = solve_algebraic(resolved.model, x0, y0, tol=solver.newton_tol,
                                 max_iter=solver.max_newton)
        return x0, y0

    @staticmethod
    def _state_index(name: str, state_names: Sequence[str]) -> int:
        if name in state_names:
            return list(state_names).index(name)
        if name.startswith("x") and name[1:].lstrip("_").isdigit():
            index = int(name[1:].lstrip("_")) - 1
            if 0 <= index < len(state_names):
                return index
        raise ParameterError(f"Unknown state '{name}' (states: {', '.join(state_names)})")

    def simulate(self) -> Trajectory:
        """Time-domain simulation from the (perturbed) start point."""
        if self.run.t_end is None:
            raise UsageError("simulate needs --tend")
        method = self.method(require_step=True)
        resolved = self.resolve_model()
        try:
            G = companion_matrix(method, resolved.J, self.linear_analysis().A)
            radius = spectral_radius(G)
            if radius > 1.0:
                self.logger.warning(f"{method.label} at h={method.h:g} is unstable on the linearized "
                                    f"model (spectral radius {radius:.6g}); the trajectory will diverge")
        except ModeshapeError as e:
            self.logger.debug(f"Skipping discrete stability check: {e}")

        x0, y0 = self.initial_state()
        trajectory = simulate(resolved.model, method, x0, y0, self.run.t_end,
                              cfg=self.solver_config(method.h),
                              consistency_solve=self.run.consistency_solve)
        summary = trajectory.summary()
        self.logger.info(f"Simulated {summary['steps']} steps, {summary['newton_total']} Newton "
                         f"iterations (max {summary['newton_max']} per step)")
        return trajectory

    def export(self) -> Dict[str, Any]:
        """Linear model JSON of a built-in model at its equilibrium."""
        resolved = self.resolve_model()
        if not resolved.builtin:
            raise ConfigError("export needs a built-in model")
        return jacobian_to_dict(resolved.J)


def hmax_payload(results: Sequence[HmaxResult]) -> Dict[str, Any]:
    """JSON document for hmax results."""
    return {"method": results[0].method if results else None,
            "results": [result.to_dict() for result in results]}


def deformation_payload(report: DeformationReport, state_names: Sequence[str]) -> Dict[str, Any]:
    """JSON document for a deformation report."""
    modes = []
    for i, s in enumerate(report.eigenvalues):
        modes.append({
            "mode": i + 1,
            "s": complex(s),
            "z": complex(report.z[i]),
            "s_hat": complex(report.s_hat[i]),
            "eps_s_pct": float(report.eps_s[i]),
            "flags": report.mode_flags(i),
            "eps_p_pct": {name: float(report.eps_p[k, i]) for k, name in enumerate(state_names)},
        })
    return {
        "method": report.method.label,
        "h": report.h,
        "spectral_radius": report.spectral_radius,
        "stable": report.stable,
        "commutator_defect": report.commutator_defect,
        "modes": modes,
        "warnings": list(report.warnings),
    }
