"""
Time-Domain Simulator

Fixed-step integration of semi-explicit DAE models with the Theta family,
2S-DIRK and Heun's method. Each step solves its implicit equations with a
full Newton iteration (Jacobians rebuilt every iteration). For a linear
model the iterates coincide with powers of the companion matrix, which is
how the companion matrices are validated.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import scipy.linalg as la
from loguru import logger

from .dae_model import DaeModel, eval_residuals, jacobians, solve_algebraic
from .discretization import DIRK_ALPHA, DIRK_BETA, CompanionMatrix
from ..models.method_models import MethodKind, MethodSpec, SolverConfig
from ..utils.exceptions import (
    InitializationError,
    NewtonError,
    NoEquilibriumError,
    ParameterError,
)

DIVERGENCE_FACTOR = 1e6


@dataclass(frozen=True)
class DirkScratch:
    """Stage values of one 2S-DIRK step; chi_n = beta x_n + (1 - beta) chi_next."""
    chi_next: np.ndarray
    psi_next: np.ndarray
    chi_n: np.ndarray


@dataclass(frozen=True)
class StepResult:
    x: np.ndarray
    y: np.ndarray
    newton_iters: int
    scratch: Optional[DirkScratch] = None


def _newton(residual: Callable[[np.ndarray], np.ndarray],
            jacobian: Callable[[np.ndarray], np.ndarray],
            z0: np.ndarray, cfg: SolverConfig, stage: str) -> Tuple[np.ndarray, int]:
    """Newton iteration on residual(z) = 0, returning the root and the iteration count."""
    z = z0.copy()
    trace: List[float] = []
    for iteration in range(cfg.max_newton + 1):
        r = residual(z)
        norm = float(np.max(np.abs(r))) if r.size else 0.0
        trace.append(norm)
        if not np.isfinite(norm):
            raise NewtonError(f"Non-finite residual in {stage}", trace=trace, stage=stage)
        if norm <= cfg.newton_tol:
            return z, iteration
        if iteration == cfg.max_newton:
            break
        try:
            z = z + la.solve(jacobian(z), -r)
        except (la.LinAlgError, ValueError) as e:
            raise NewtonError(f"Singular Newton matrix in {stage}: {e}", trace=trace, stage=stage) from e
    raise NewtonError(f"Newton did not converge in {stage} after {cfg.max_newton} iterations "
                      f"(residual {trace[-1]:.3e})", trace=trace, stage=stage)


def _implicit_solve(model: DaeModel, anchor: np.ndarray, explicit: np.ndarray, gain: float,
                    guess: Tuple[np.ndarray, np.ndarray], cfg: SolverConfig,
                    stage: str) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    Solve x - anchor - explicit - gain f(x, y) = 0, g(x, y) = 0 for (x, y).
    """
    nu = model.nu

    def residual(z):
        f, g = eval_residuals(model, z[:nu], z[nu:])
        return np.concatenate([z[:nu] - anchor - explicit - gain * f, g])

    def jacobian(z):
        J = jacobians(model, z[:nu], z[nu:])
        return np.block([[np.eye(nu) - gain * J.f_x, -gain * J.f_y], [J.g_x, J.g_y]])

    z, iters = _newton(residual, jacobian, np.concatenate(guess), cfg, stage)
    return z[:nu], z[nu:], iters


def _step_size(cfg: SolverConfig) -> float:
    if cfg.h is None:
        raise ParameterError("Solver configuration has no step size")
    return cfg.h


def step_theta(model: DaeModel, x_n, y_n, theta: float, cfg: SolverConfig) -> StepResult:
    """
    One Theta-method step:
        x_{n+1} = x_n + h [theta f(x_n, y_n) + (1 - theta) f(x_{n+1}, y_{n+1})]
        0 = g(x_{n+1}, y_{n+1})
    """
    h = _step_size(cfg)
    x_n, y_n = np.asarray(x_n, dtype=float), np.asarray(y_n, dtype=float)
    f_n, _ = eval_residuals(model, x_n, y_n)
    x, y, iters = _implicit_solve(model, x_n, h * theta * f_n, h * (1.0 - theta),
                                  (x_n, y_n), cfg, "theta")
    return StepResult(x=x, y=y, newton_iters=iters)


def step_dirk(model: DaeModel, x_n, y_n, cfg: SolverConfig) -> StepResult:
    """
    One 2S-DIRK step (alpha = 1 - 1/sqrt(2), beta = -sqrt(2)).

    Stage 1 solves chi_next = x_n + alpha h f(chi_next, psi_next) with g = 0,
    the combined point is chi_n = beta x_n + (1 - beta) chi_next, and stage
    2 solves x_{n+1} = chi_n + alpha h f(x_{n+1}, y_{n+1}) with g = 0.
    """
    h = _step_size(cfg)
    x_n, y_n = np.asarray(x_n, dtype=float), np.asarray(y_n, dtype=float)
    zero = np.zeros(model.nu)
    chi_next, psi_next, iters_1 = _implicit_solve(model, x_n, zero, DIRK_ALPHA * h,
                                                  (x_n, y_n), cfg, "dirk stage 1")
    chi_n = DIRK_BETA * x_n + (1.0 - DIRK_BETA) * chi_next
    x, y, iters_2 = _implicit_solve(model, chi_n, zero, DIRK_ALPHA * h,
                                    (chi_next, psi_next), cfg, "dirk stage 2")
    return StepResult(x=x, y=y, newton_iters=iters_1 + iters_2,
                      scratch=DirkScratch(chi_next=chi_next, psi_next=psi_next, chi_n=chi_n))


def step_heun(model: DaeModel, x_n, y_n, r: int, cfg: SolverConfig) -> StepResult:
    """
    One Heun step with r corrector passes.

    The correctors use the extrapolated algebraic variables y_n; the
    algebraic equations are solved once for y_{n+1} after the state update.
    """
    if r < 0:
        raise ParameterError(f"Heun corrector count must be non-negative (got {r})")
    h = _step_size(cfg)
    x_n, y_n = np.asarray(x_n, dtype=float), np.asarray(y_n, dtype=float)
    f_n, _ = eval_residuals(model, x_n, y_n)
    xi = x_n + h * f_n
    for _ in range(r):
        f_xi, _ = eval_residuals(model, xi, y_n)
        xi = x_n + 0.5 * h * f_n + 0.5 * h * f_xi

    if model.mu == 0:
        return StepResult(x=xi, y=y_n.copy(), newton_iters=0)

    def residual(y):
        return eval_residuals(model, xi, y)[1]

    def jacobian(y):
        return jacobians(model, xi, y).g_y

    y, iters = _newton(residual, jacobian, y_n.copy(), cfg, "heun algebraic")
    return StepResult(x=xi, y=y, newton_iters=iters)


@dataclass
class Trajectory:
    """
    Simulated trajectory; row n of X and Y is the state at times[n].

    converged is False when a step failed; the trajectory then holds the
    accepted steps only.
    """
    times: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    newton_iters: np.ndarray
    converged: bool = True
    method: str = ""
    algebraic_residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    diverged: bool = False
    failure: Optional[str] = None

    @property
    def steps(self) -> int:
        return max(0, self.times.size - 1)

    def to_frame(self) -> pd.DataFrame:
        nu, mu = self.X.shape[1], self.Y.shape[1]
        columns = ["t"] + [f"x_{k + 1}" for k in range(nu)] + [f"y_{k + 1}" for k in range(mu)]
        if self.times.size == 0:
            return pd.DataFrame(columns=columns)
        data = np.column_stack([self.times, self.X, self.Y])
        return pd.DataFrame(data, columns=columns)

    def summary(self) -> dict:
        return {
            "method": self.method,
            "steps": self.steps,
            "newton_total": int(self.newton_iters.sum()),
            "newton_max": int(self.newton_iters.max()) if self.newton_iters.size else 0,
            "max_algebraic_residual": float(self.algebraic_residuals.max())
            if self.algebraic_residuals.size else 0.0,
            "converged": self.converged,
            "diverged": self.diverged,
            "failure": self.failure,
        }


def _stepper(method: MethodSpec) -> Callable[[DaeModel, np.ndarray, np.ndarray, SolverConfig], StepResult]:
    spec = method.resolved()
    if spec.kind is MethodKind.THETA:
        return lambda model, x, y, cfg: step_theta(model, x, y, spec.theta, cfg)
    if spec.kind is MethodKind.DIRK2S:
        return step_dirk
    if spec.kind is MethodKind.HEUN:
        return lambda model, x, y, cfg: step_heun(model, x, y, spec.r, cfg)
    raise ParameterError(f"Unsupported method {method.label}")


def simulate(model: DaeModel, method: MethodSpec, x0, y0, t_end: float,
             cfg: Optional[SolverConfig] = None, consistency_solve: bool = False) -> Trajectory:
    """
    Integrate a model from (x0, y0) to t_end with a fixed step.

    The step size comes from the method, or from cfg when the method has
    none. t_end = 0 returns an empty trajectory. Growth beyond the divergence
    bound sets diverged and integration continues to t_end. A failed Newton
    solve, including one on a non-finite state, stops the run and returns the
    accepted steps with converged = False.

    Raises:
        ParameterError: negative t_end or no step size
        InitializationError: y0 violates g(x0, y0) = 0 and no consistency solve was requested
    """
    cfg = cfg or SolverConfig()
    h = method.h if method.h is not None else cfg.h
    if h is None:
        raise ParameterError(f"No step size for {method.label}")
    cfg = cfg.model_copy(update={"h": h})
    if t_end < 0:
        raise ParameterError(f"t_end must be non-negative (got {t_end})")

    x = np.asarray(x0, dtype=float).reshape(-1)
    y = np.asarray(y0, dtype=float).reshape(-1) if model.mu else np.zeros(0)
    _, g0 = eval_residuals(model, x, y)
    inconsistency = float(np.max(np.abs(g0))) if g0.size else 0.0
    if inconsistency > cfg.consistency_tol:
        if not consistency_solve:
            raise InitializationError(
                f"Initial algebraic variables are inconsistent (|g| = {inconsistency:.3e}); "
                f"request a consistency solve", residual_norm=inconsistency)
        try:
            y = solve_algebraic(model, x, y, tol=cfg.newton_tol, max_iter=cfg.max_newton)
        except NoEquilibriumError as e:
            raise InitializationError(f"Consistency solve failed: {e}") from e
        logger.info(f"Initial algebraic variables projected (|g| was {inconsistency:.3e})")

    empty = Trajectory(times=np.zeros(0), X=np.zeros((0, model.nu)), Y=np.zeros((0, model.mu)),
                       newton_iters=np.zeros(0, dtype=int), method=method.label)
    if t_end == 0:
        return empty

    steps = int(round(t_end / h))
    step = _stepper(method)
    times, states, algebraics = [0.0], [x], [y]
    g_start = eval_residuals(model, x, y)[1]
    iterations = [0]
    residuals = [float(np.max(np.abs(g_start))) if g_start.size else 0.0]
    bound = DIVERGENCE_FACTOR * max(1.0, float(np.max(np.abs(x))))
    converged, diverged, failure = True, False, None

    logger.debug(f"Simulating {model.name} with {method.label}, h={h:g}, {steps} steps")
    for n in range(steps):
        try:
            result = step(model, states[-1], algebraics[-1], cfg)
        except NewtonError as e:
            logger.error(f"Step {n + 1} at t={(n + 1) * h:g} failed: {e}")
            converged, failure = False, str(e)
            break
        times.append((n + 1) * h)
        states.append(result.x)
        algebraics.append(result.y)
        iterations.append(result.newton_iters)
        g = eval_residuals(model, result.x, result.y)[1]
        residuals.append(float(np.max(np.abs(g))) if g.size else 0.0)
        if not diverged and np.max(np.abs(result.x)) > bound:
            diverged = True
            logger.warning(f"Trajectory diverged at t={(n + 1) * h:g}")

    return Trajectory(times=np.asarray(times), X=np.vstack(states),
                      Y=np.vstack(algebraics) if model.mu else np.zeros((len(times), 0)),
                      newton_iters=np.asarray(iterations, dtype=int), converged=converged,
                      method=method.label, algebraic_residuals=np.asarray(residuals),
                      diverged=diverged, failure=failure)


def linear_reference(G, x0: Sequence[float], steps: int) -> np.ndarray:
    """Iterates x_{n+1} = G x_n, returned as (steps + 1) rows including x0."""
    if steps < 0:
        raise ParameterError(f"steps must be non-negative (got {steps})")
    G = G.G if isinstance(G, CompanionMatrix) else np.asarray(G, dtype=float)
    out = np.empty((steps + 1, G.shape[0]))
    out[0] = np.asarray(x0, dtype=float)
    for n in range(steps):
        out[n + 1] = G @ out[n]
    return out
