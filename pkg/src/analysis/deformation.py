"""
Deformation Metrics

Pairs the spectrum of the state matrix A with the spectrum of a companion
matrix G through the map z = exp(s h), then measures the eigenvalue
deformation eps_s and the participation-factor deformation eps_p. On top
of the single-step report this module provides step-size sweeps, the
maximum admissible step search and the stiffness experiment.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from scipy.optimize import linear_sum_assignment

from .dae_model import JacobianSet
from .discretization import CompanionMatrix, commutator_defect, companion_matrix
from .eigen_core import CLUSTER_REL_TOL, Spectrum, eig_full
from .sssa import (
    ParticipationMatrix,
    damping_ratios,
    normalize_columns,
    participation_matrix,
    reduce_state_matrix,
    stiffness_ratio,
    zero_modes,
)
from ..models.method_models import MethodSpec
from ..utils.exceptions import ConformanceError, ModeshapeError, ParameterError

PF_FLOOR = 1e-3
FLAG_ORDER = ("aliased", "degenerate", "low_pf", "failed")
SWEEP_COLUMNS = ["h", "mode_re", "mode_im", "zeta_pct", "state",
                 "eps_s_pct", "eps_p_pct", "flags", "mode_id", "state_id"]
TABLE_SCENARIOS: Tuple[Dict[str, float], ...] = (
    {"eps_s": 5.0},
    {"eps_p": 5.0},
    {"eps_p": 10.0},
    {"eps_s": 5.0, "eps_p": 5.0},
)


# ---------------------------------------------------------------------------
# Pairing and metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModePairing:
    """
    Bijection between modes of A (index i) and eigenvalues of G (perm[i]).

    Attributes:
        perm: perm[i] is the index in Spectrum(G) paired with mode i
        cost: Total assignment cost sum |exp(s_i h) - z_perm[i]|
        aliased: |Im s_i| >= pi / h
        degenerate: Mode belongs to a degenerate cluster of the continuous spectrum
    """
    perm: np.ndarray
    cost: float
    aliased: np.ndarray
    degenerate: np.ndarray

    @property
    def pairs(self) -> List[Tuple[int, int]]:
        return [(i, int(j)) for i, j in enumerate(self.perm)]


def _finite_cost(cost: np.ndarray) -> np.ndarray:
    ceiling = np.finfo(float).max / (cost.shape[0] + 1)
    return np.where(np.isfinite(cost), np.minimum(cost, ceiling), ceiling)


def pair_modes(spec_A: Spectrum, spec_G: Spectrum, h: float) -> ModePairing:
    """
    Optimal assignment between exp(s_i h) and the eigenvalues of G.

    Collinear spectra can tie under the absolute-distance cost; among the
    optimal assignments the one that also minimizes squared distances is
    returned.

    Raises:
        ConformanceError: the spectra have different orders
    """
    if spec_A.order != spec_G.order:
        raise ConformanceError(f"Cannot pair spectra of order {spec_A.order} and {spec_G.order}")

    target = np.exp(spec_A.eigenvalues * h)
    cost = _finite_cost(np.abs(target[:, None] - spec_G.eigenvalues[None, :]))
    rows, perm = linear_sum_assignment(cost)
    best = float(cost[rows, perm].sum())

    rows_sq, perm_sq = linear_sum_assignment(cost ** 2)
    cost_sq = float(cost[rows_sq, perm_sq].sum())
    if cost_sq <= best * (1.0 + 1e-12) + np.finfo(float).tiny:
        perm, best = perm_sq, cost_sq

    aliased = np.abs(spec_A.eigenvalues.imag) >= math.pi / h
    degenerate = spec_A.degenerate.copy()
    return ModePairing(perm=np.asarray(perm), cost=best, aliased=aliased, degenerate=degenerate)


def eig_deformation(pairing: ModePairing, spec_A: Spectrum, spec_G: Spectrum, h: float) -> np.ndarray:
    """
    eps_s = 100 |s - log(z) / h| / |s| per mode, principal logarithm.

    z = 0 yields +inf; s = 0 yields NaN and is excluded with a warning.
    """
    s = spec_A.eigenvalues
    z = spec_G.eigenvalues[pairing.perm].astype(complex)
    zeros = zero_modes(spec_A)
    if zeros.any():
        logger.warning(f"{int(zeros.sum())} zero eigenvalue(s) excluded from eps_s")
    if pairing.aliased.any():
        logger.warning(f"{int(pairing.aliased.sum())} mode(s) beyond the aliasing limit pi/h = "
                       f"{math.pi / h:.4g} rad/s; eps_s is unreliable for them")

    eps = np.full(s.size, np.nan)
    vanishing = np.abs(z) == 0
    valid = ~zeros & ~vanishing
    eps[valid] = 100.0 * np.abs(s[valid] - np.log(z[valid]) / h) / np.abs(s[valid])
    eps[~zeros & vanishing] = np.inf
    return eps


@dataclass(frozen=True)
class PfDeformation:
    """
    Mode-shape deformation per (state, mode).

    Attributes:
        eps_p: Signed percent deformation, NaN where |p| < pf_floor
        low_pf: |p| < pf_floor
        basis_ambiguous: Mode re-paired inside a degenerate cluster
        perm: Final column permutation of Pi
    """
    eps_p: np.ndarray
    low_pf: np.ndarray
    basis_ambiguous: np.ndarray
    perm: np.ndarray


def _repair_degenerate(perm: np.ndarray, spec_A: Spectrum, spec_G: Spectrum) -> Tuple[np.ndarray, np.ndarray]:
    perm = perm.copy()
    ambiguous = np.zeros(perm.size, dtype=bool)
    sizes = spec_A.cluster_sizes
    for label in np.unique(spec_A.degeneracy[sizes > 1]):
        modes = np.flatnonzero(spec_A.degeneracy == label)
        columns = perm[modes]
        similarity = np.abs(spec_A.U[:, modes].conj().T @ spec_G.U[:, columns])
        _, best = linear_sum_assignment(-similarity)
        perm[modes] = columns[best]
        ambiguous[modes] = True
    return perm, ambiguous


def pf_deformation(P_hat: ParticipationMatrix, Pi_hat: ParticipationMatrix, pairing: ModePairing,
                   spec_A: Optional[Spectrum] = None, spec_G: Optional[Spectrum] = None,
                   pf_floor: float = PF_FLOOR) -> PfDeformation:
    """
    eps_p = 100 (|pi| - |p|) / |p| with the columns of Pi permuted by the pairing.

    Args:
        P_hat: Participation matrix of A
        Pi_hat: Participation matrix of G
        pairing: Mode pairing
        spec_A, spec_G: Spectra used to re-pair degenerate clusters by
            maximal |cosine similarity| of right eigenvectors
        pf_floor: Entries with |p| below this are flagged and left undefined

    Raises:
        ConformanceError: the matrices use different normalizations or shapes
    """
    if P_hat.normalized != Pi_hat.normalized:
        raise ConformanceError("Participation matrices use different normalization conventions")
    if P_hat.P.shape != Pi_hat.P.shape:
        raise ConformanceError(f"Participation shapes differ: {P_hat.P.shape} vs {Pi_hat.P.shape}")

    perm = np.asarray(pairing.perm)
    ambiguous = np.zeros(perm.size, dtype=bool)
    if spec_A is not None and spec_G is not None and spec_A.has_degenerate:
        perm, ambiguous = _repair_degenerate(perm, spec_A, spec_G)

    p = P_hat.magnitudes
    pi = Pi_hat.magnitudes[:, perm]
    low = p < pf_floor
    eps = np.full(p.shape, np.nan)
    eps[~low] = 100.0 * (pi[~low] - p[~low]) / p[~low]
    return PfDeformation(eps_p=eps, low_pf=low, basis_ambiguous=ambiguous, perm=perm)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def critical_modes(spec_A: Spectrum, n_modes: int) -> np.ndarray:
    """Indices of the n_modes least damped modes (ties: smaller |s|, then index)."""
    zeta = damping_ratios(spec_A.eigenvalues)
    index = np.arange(spec_A.order)
    order = np.lexsort((index, np.abs(spec_A.eigenvalues), zeta))
    return order[:max(0, min(int(n_modes), spec_A.order))]


def top_states(P_hat: ParticipationMatrix, mode: int, top_k: int) -> np.ndarray:
    """Indices of the top_k states by |p| in a mode column (ties by index)."""
    magnitudes = P_hat.magnitudes[:, mode]
    index = np.arange(magnitudes.size)
    order = np.lexsort((index, -magnitudes))
    return order[:max(0, min(int(top_k), magnitudes.size))]


@dataclass(frozen=True)
class LinearAnalysis:
    """State matrix, spectrum and normalized participation of a linearized model."""
    J: JacobianSet
    A: np.ndarray
    spectrum: Spectrum
    participation: ParticipationMatrix

    @classmethod
    def from_jacobians(cls, J: JacobianSet, A: Optional[np.ndarray] = None,
                       cluster_rel_tol: float = CLUSTER_REL_TOL) -> "LinearAnalysis":
        A = reduce_state_matrix(J) if A is None else np.asarray(A, dtype=float)
        spectrum = eig_full(A, cluster_rel_tol=cluster_rel_tol)
        return cls(J=J, A=A, spectrum=spectrum,
                   participation=normalize_columns(participation_matrix(spectrum)))


@dataclass(frozen=True)
class DeformationReport:
    """
    eps_s and eps_p of a method at one step size.

    eps_p is indexed [state, mode] in the order of Spectrum(A); z holds the
    eigenvalue of G paired with each mode.
    """
    method: MethodSpec
    h: float
    eigenvalues: np.ndarray
    z: np.ndarray
    eps_s: np.ndarray
    eps_p: np.ndarray
    low_pf: np.ndarray
    aliased: np.ndarray
    degenerate: np.ndarray
    participation: np.ndarray
    spectral_radius: float
    commutator_defect: float
    reliable: bool = True
    warnings: List[str] = field(default_factory=list)

    @property
    def stable(self) -> bool:
        return self.spectral_radius < 1.0

    @property
    def s_hat(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.z.astype(complex)) / self.h

    def mode_flags(self, mode: int) -> List[str]:
        flags = []
        if self.aliased[mode]:
            flags.append("aliased")
        if self.degenerate[mode]:
            flags.append("degenerate")
        return flags

    def max_abs_eps_p(self, modes: Iterable[int], top_k: int) -> float:
        """Largest |eps_p| over the top_k states of the given modes, skipping flagged entries."""
        worst = 0.0
        for i in modes:
            if self.aliased[i] or self.degenerate[i]:
                continue
            for k in _top_by_magnitude(self.participation[:, i], top_k):
                if not self.low_pf[k, i] and np.isfinite(self.eps_p[k, i]):
                    worst = max(worst, abs(float(self.eps_p[k, i])))
        return worst

    def to_frame(self, state_names: Optional[Sequence[str]] = None,
                 modes: Optional[Sequence[int]] = None,
                 top_k: Optional[int] = None) -> pd.DataFrame:
        """
        Long-format table with one row per (mode, state).

        Args:
            state_names: Labels for the state column
            modes: Mode indices to include (all when omitted)
            top_k: Restrict to the top_k states by |p| of each mode
        """
        nu = self.eigenvalues.size
        names = list(state_names) if state_names else [f"x{k + 1}" for k in range(nu)]
        modes = range(nu) if modes is None else modes
        zeta = damping_ratios(self.eigenvalues)
        rows = []
        for i in modes:
            states = _top_by_magnitude(self.participation[:, i], top_k or nu)
            for k in states:
                flags = self.mode_flags(i)
                if self.low_pf[k, i]:
                    flags.append("low_pf")
                rows.append({
                    "h": self.h,
                    "mode_re": float(self.eigenvalues[i].real),
                    "mode_im": float(self.eigenvalues[i].imag),
                    "zeta_pct": float(zeta[i]),
                    "state": names[k],
                    "eps_s_pct": float(self.eps_s[i]),
                    "eps_p_pct": float(self.eps_p[k, i]),
                    "flags": ";".join(flags),
                    "mode_id": int(i),
                    "state_id": int(k),
                })
        return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def _top_by_magnitude(column: np.ndarray, top_k: int) -> np.ndarray:
    index = np.arange(column.size)
    return np.lexsort((index, -column))[:max(0, min(int(top_k), column.size))]


def deformation_report(J: JacobianSet, method: MethodSpec, A: Optional[np.ndarray] = None,
                       base: Optional[LinearAnalysis] = None,
                       pf_floor: float = PF_FLOOR) -> DeformationReport:
    """
    Full deformation analysis of a method at its step size.

    Args:
        J: Jacobians of the model
        method: Method with a bound step size
        A: Reduced state matrix (computed when omitted)
        base: Precomputed spectrum and participation of A, reused across a sweep
        pf_floor: Negligible participation threshold

    Raises:
        StepSizeSingularityError: the method's iteration matrix is singular at h
    """
    h = method.require_step()
    if base is None:
        base = LinearAnalysis.from_jacobians(J, A)
    companion: CompanionMatrix = companion_matrix(method, J, base.A)
    spec_G = eig_full(companion.G)
    Pi_hat = normalize_columns(participation_matrix(spec_G))

    pairing = pair_modes(base.spectrum, spec_G, h)
    eps_s = eig_deformation(pairing, base.spectrum, spec_G, h)
    pf = pf_deformation(base.participation, Pi_hat, pairing,
                        base.spectrum, spec_G, pf_floor=pf_floor)

    warnings = []
    if pairing.aliased.any():
        warnings.append("aliased modes present")
    if base.spectrum.condition_warning or spec_G.condition_warning:
        warnings.append("ill-conditioned eigenvectors")
    radius = float(np.max(np.abs(spec_G.eigenvalues)))
    if radius >= 1.0:
        warnings.append(f"discrete system unstable (spectral radius {radius:.6g})")

    return DeformationReport(
        method=method, h=h,
        eigenvalues=base.spectrum.eigenvalues,
        z=spec_G.eigenvalues[pf.perm],
        eps_s=eps_s, eps_p=pf.eps_p, low_pf=pf.low_pf,
        aliased=pairing.aliased,
        degenerate=pairing.degenerate | pf.basis_ambiguous,
        participation=base.participation.magnitudes,
        spectral_radius=radius,
        commutator_defect=commutator_defect(base.A, companion),
        reliable=base.participation.reliable and Pi_hat.reliable,
        warnings=warnings,
    )


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def _validate_grid(h_grid: Sequence[float]) -> np.ndarray:
    grid = np.asarray(list(h_grid), dtype=float)
    if grid.size and (np.any(~np.isfinite(grid)) or np.any(grid <= 0)):
        raise ParameterError("Step sizes must be positive and finite")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise ParameterError("Step-size grid must be strictly ascending")
    return grid


class _GridEvaluator:
    """Evaluates and memoizes deformation reports per grid point."""

    def __init__(self, J: JacobianSet, method: MethodSpec, base: LinearAnalysis, pf_floor: float):
        self.J = J
        self.method = method
        self.base = base
        self.pf_floor = pf_floor
        self._cache: Dict[float, object] = {}

    def evaluate(self, h: float):
        """Return a DeformationReport or the ModeshapeError raised at h."""
        if h not in self._cache:
            try:
                self._cache[h] = deformation_report(self.J, self.method.with_step(h),
                                                    base=self.base, pf_floor=self.pf_floor)
            except ModeshapeError as e:
                logger.warning(f"{self.method.label} failed at h={h:g}: {e}")
                self._cache[h] = e
        return self._cache[h]


def _failed_rows(h: float, base: LinearAnalysis, modes: Sequence[int], top_k: int,
                 names: Sequence[str]) -> List[dict]:
    zeta = damping_ratios(base.spectrum.eigenvalues)
    rows = []
    for i in modes:
        s = base.spectrum.eigenvalues[i]
        for k in top_states(base.participation, i, top_k):
            rows.append({"h": h, "mode_re": float(s.real), "mode_im": float(s.imag),
                         "zeta_pct": float(zeta[i]), "state": names[k],
                         "eps_s_pct": np.nan, "eps_p_pct": np.nan, "flags": "failed",
                         "mode_id": int(i), "state_id": int(k)})
    return rows


def sweep(J: JacobianSet, method: MethodSpec, h_grid: Sequence[float], top_k_pf: int = 3,
          n_modes: int = 5, pf_floor: float = PF_FLOOR, workers: int = 1,
          state_names: Optional[Sequence[str]] = None,
          A: Optional[np.ndarray] = None) -> pd.DataFrame:
    """
    eps_s and eps_p of the tracked modes over a step-size grid.

    Tracked modes are the n_modes least damped ones; for each the top_k_pf
    states by |p| are reported. A grid point whose companion matrix cannot
    be built yields rows flagged "failed" and the sweep continues.

    Returns:
        Long-format DataFrame in grid order, columns SWEEP_COLUMNS
    """
    grid = _validate_grid(h_grid)
    if grid.size == 0:
        return pd.DataFrame(columns=SWEEP_COLUMNS)

    base = LinearAnalysis.from_jacobians(J, A)
    names = list(state_names) if state_names else [f"x{k + 1}" for k in range(J.nu)]
    modes = critical_modes(base.spectrum, n_modes)
    evaluator = _GridEvaluator(J, method, base, pf_floor)

    logger.info(f"Sweeping {method.label} over {grid.size} step sizes "
                f"({modes.size} modes, top {min(top_k_pf, J.nu)} states, workers={workers})")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluator.evaluate, grid))
    else:
        results = [evaluator.evaluate(h) for h in grid]

    frames = []
    for h, result in zip(grid, results):
        if isinstance(result, DeformationReport):
            frames.append(result.to_frame(names, modes=modes, top_k=top_k_pf))
        else:
            frames.append(pd.DataFrame(_failed_rows(float(h), base, modes, top_k_pf, names),
                                       columns=SWEEP_COLUMNS))
    return pd.concat(frames, ignore_index=True)


# ---------------------------------------------------------------------------
# Maximum admissible step
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HmaxResult:
    """
    Outcome of the maximum admissible step search for one criterion set.

    status is "bounded", "unbounded" (criterion holds on the whole grid,
    hmax = inf) or "below-grid" (fails at the smallest grid point, hmax = 0).
    """
    method: str
    criteria: Dict[str, float]
    hmax: float
    status: str
    limiting_metric: Optional[str] = None
    limiting_mode: Optional[complex] = None
    first_failure_h: Optional[float] = None

    def to_dict(self) -> dict:
        if self.status == "unbounded":
            value = "infinity"
        elif self.status == "below-grid":
            value = "below-grid"
        else:
            value = self.hmax
        mode = None
        if self.limiting_mode is not None:
            mode = {"re": self.limiting_mode.real, "im": self.limiting_mode.imag}
        return {"method": self.method, "criteria": dict(self.criteria), "hmax": value,
                "limiting_metric": self.limiting_metric, "limiting_mode": mode,
                "first_failure_h": self.first_failure_h}


def _violation(report, modes: np.ndarray, top_k: int, eps_s_max: Optional[float],
               eps_p_max: Optional[float], eigenvalues: np.ndarray) -> Optional[Tuple[str, complex]]:
    """Return (metric, mode) of the worst violation at one grid point, or None."""
    if not isinstance(report, DeformationReport):
        return "failed", None

    metrics: List[str] = []
    worst_ratio, worst_mode = -1.0, None
    if eps_s_max is not None:
        for i in modes:
            value = report.eps_s[i]
            if np.isnan(value):
                continue
            if value > eps_s_max:
                if "eps_s" not in metrics:
                    metrics.append("eps_s")
                if value / eps_s_max > worst_ratio:
                    worst_ratio, worst_mode = value / eps_s_max, eigenvalues[i]
    if eps_p_max is not None:
        for i in modes:
            if report.aliased[i] or report.degenerate[i]:
                continue
            for k in _top_by_magnitude(report.participation[:, i], top_k):
                value = report.eps_p[k, i]
                if report.low_pf[k, i] or not np.isfinite(value):
                    continue
                if abs(value) > eps_p_max:
                    if "eps_p" not in metrics:
                        metrics.append("eps_p")
                    if abs(value) / eps_p_max > worst_ratio:
                        worst_ratio, worst_mode = abs(value) / eps_p_max, eigenvalues[i]
    if not metrics:
        return None
    return ",".join(metrics), worst_mode


def _scan(evaluator: _GridEvaluator, grid: np.ndarray, criteria: Dict[str, float],
          n_modes: int, top_k_pf: int) -> HmaxResult:
    eps_s_max = criteria.get("eps_s")
    eps_p_max = criteria.get("eps_p")
    if eps_s_max is None and eps_p_max is None:
        raise ParameterError("hmax needs at least one of eps_s or eps_p")
    for value in (eps_s_max, eps_p_max):
        if value is not None and value <= 0:
            raise ParameterError(f"Thresholds must be positive (got {value})")

    spectrum = evaluator.base.spectrum
    modes = critical_modes(spectrum, n_modes)
    label = evaluator.method.label
    for index, h in enumerate(grid):
        violation = _violation(evaluator.evaluate(float(h)), modes, top_k_pf,
                               eps_s_max, eps_p_max, spectrum.eigenvalues)
        if violation is None:
            continue
        metric, mode = violation
        mode = complex(mode) if mode is not None else None
        if index == 0:
            logger.info(f"{label} {criteria}: criterion fails at the smallest grid step {h:g}")
            return HmaxResult(method=label, criteria=criteria, hmax=0.0, status="below-grid",
                              limiting_metric=metric, limiting_mode=mode, first_failure_h=float(h))
        hmax_value = float(grid[index - 1])
        logger.info(f"{label} {criteria}: hmax = {hmax_value:g} (limited by {metric})")
        return HmaxResult(method=label, criteria=criteria, hmax=hmax_value, status="bounded",
                          limiting_metric=metric, limiting_mode=mode, first_failure_h=float(h))

    logger.info(f"{label} {criteria}: criterion holds on the entire grid")
    return HmaxResult(method=label, criteria=criteria, hmax=math.inf, status="unbounded")


def hmax(J: JacobianSet, method: MethodSpec, h_grid: Sequence[float],
         eps_s_max: Optional[float] = None, eps_p_max: Optional[float] = None,
         n_modes: int = 5, top_k_pf: int = 3, pf_floor: float = PF_FLOOR,
         A: Optional[np.ndarray] = None) -> HmaxResult:
    """
    Largest grid step h* such that the criteria hold at h* and at every smaller grid step.

    Grid points are evaluated in ascending order and the scan stops at the
    first failure.

    Raises:
        ParameterError: no criterion given or the grid is empty or not ascending
    """
    criteria = {}
    if eps_s_max is not None:
        criteria["eps_s"] = float(eps_s_max)
    if eps_p_max is not None:
        criteria["eps_p"] = float(eps_p_max)
    if not criteria:
        raise ParameterError("hmax needs at least one of eps_s or eps_p")
    grid = _validate_grid(h_grid)
    if grid.size == 0:
        raise ParameterError("hmax needs a non-empty step-size grid")

    base = LinearAnalysis.from_jacobians(J, A)
    return _scan(_GridEvaluator(J, method, base, pf_floor), grid, criteria, n_modes, top_k_pf)


def hmax_table(J: JacobianSet, method: MethodSpec, h_grid: Sequence[float],
               scenarios: Sequence[Dict[str, float]] = TABLE_SCENARIOS,
               n_modes: int = 5, top_k_pf: int = 3, pf_floor: float = PF_FLOOR,
               A: Optional[np.ndarray] = None) -> List[HmaxResult]:
    """Maximum admissible step for several criterion sets sharing one set of grid evaluations."""
    grid = _validate_grid(h_grid)
    if grid.size == 0:
        raise ParameterError("hmax needs a non-empty step-size grid")
    base = LinearAnalysis.from_jacobians(J, A)
    evaluator = _GridEvaluator(J, method, base, pf_floor)
    return [_scan(evaluator, grid, dict(scenario), n_modes, top_k_pf) for scenario in scenarios]


# ---------------------------------------------------------------------------
# Stiffness experiment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StiffnessExperiment:
    """Max |eps_p| per step for an original and a stiffer variant of a model."""
    frame: pd.DataFrame
    stiffness_base: float
    stiffness_modified: float


def stiffness_experiment(base: JacobianSet, modified: JacobianSet, method: MethodSpec,
                         h_grid: Sequence[float], n_modes: int = 5, top_k_pf: int = 3,
                         pf_floor: float = PF_FLOOR) -> StiffnessExperiment:
    """
    Compare the mode-shape deformation of two models over the same grid.

    Returns:
        Frame with columns h, max_eps_p_base, max_eps_p_modified (NaN at a
        failed grid point) and both stiffness ratios
    """
    grid = _validate_grid(h_grid)
    columns = {}
    ratios = []
    for key, J in (("base", base), ("modified", modified)):
        analysis = LinearAnalysis.from_jacobians(J)
        ratios.append(stiffness_ratio(analysis.spectrum))
        modes = critical_modes(analysis.spectrum, n_modes)
        evaluator = _GridEvaluator(J, method, analysis, pf_floor)
        values = []
        for h in grid:
            report = evaluator.evaluate(float(h))
            values.append(report.max_abs_eps_p(modes, top_k_pf)
                          if isinstance(report, DeformationReport) else np.nan)
        columns[f"max_eps_p_{key}"] = values

    logger.info(f"Stiffness experiment: S {ratios[0]:.4g} -> {ratios[1]:.4g}")
    frame = pd.DataFrame({"h": grid, **columns})
    return StiffnessExperiment(frame=frame, stiffness_base=ratios[0], stiffness_modified=ratios[1])
