"""
DAE Models

Semi-explicit autonomous DAE models x' = f(x, y), 0 = g(x, y): residual
evaluation, analytic and finite-difference Jacobians, Newton equilibrium
search, the built-in desk-scale systems and JSON import/export of
linearized models.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Tuple

import numpy as np
import scipy.linalg as la
from loguru import logger

from ..utils.exceptions import (
    ConformanceError,
    EvaluationError,
    ModelFileAccessError,
    ModelFileError,
    NoEquilibriumError,
    ParameterError,
)

Evaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]
JacobianEvaluator = Callable[[np.ndarray, np.ndarray],
                             Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]]

FD_REL_STEP = 1e-6


@dataclass(frozen=True)
class JacobianSet:
    """
    The four Jacobian blocks of a DAE evaluated at (x_o, y_o).

    Attributes:
        f_x, f_y, g_x, g_y: Blocks of shape (nu, nu), (nu, mu), (mu, nu), (mu, mu)
        x_o, y_o: Evaluation point
        name: Model identifier
        gy_condition: 2-norm condition estimate of g_y (1.0 when mu = 0)
    """
    f_x: np.ndarray
    f_y: np.ndarray
    g_x: np.ndarray
    g_y: np.ndarray
    x_o: np.ndarray
    y_o: np.ndarray
    name: str = "model"
    gy_condition: float = field(default=float("nan"))

    def __post_init__(self):
        for key in ("f_x", "f_y", "g_x", "g_y", "x_o", "y_o"):
            value = np.asarray(getattr(self, key), dtype=float)
            if not np.all(np.isfinite(value)):
                raise ConformanceError(f"{key} contains non-finite entries")
            object.__setattr__(self, key, value)
        nu = self.f_x.shape[0] if self.f_x.ndim == 2 else -1
        mu = self.g_y.shape[0] if self.g_y.ndim == 2 else -1
        expected = {
            "f_x": (nu, nu), "f_y": (nu, mu), "g_x": (mu, nu), "g_y": (mu, mu),
            "x_o": (nu,), "y_o": (mu,),
        }
        if nu < 1 or mu < 0:
            raise ConformanceError(f"Invalid Jacobian dimensions nu={nu}, mu={mu}")
        for key, shape in expected.items():
            actual = getattr(self, key).shape
            if actual != shape:
                raise ConformanceError(f"{key} has shape {actual}, expected {shape}")
        if mu == 0:
            object.__setattr__(self, "gy_condition", 1.0)
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                condition = float(np.linalg.cond(self.g_y))
            object.__setattr__(self, "gy_condition", condition if np.isfinite(condition) else float("inf"))

    @property
    def nu(self) -> int:
        return self.f_x.shape[0]

    @property
    def mu(self) -> int:
        return self.g_y.shape[0]

    def full(self) -> np.ndarray:
        """The stacked (nu+mu) x (nu+mu) Jacobian of [f; g]."""
        return np.block([[self.f_x, self.f_y], [self.g_x, self.g_y]])


@dataclass(frozen=True)
class StationaryPoint:
    """A converged equilibrium (x_o, y_o) with its residual."""
    x_o: np.ndarray
    y_o: np.ndarray
    residual_norm: float
    iterations: int = 0


@dataclass(frozen=True)
class DaeModel:
    """
    Autonomous semi-explicit DAE model.

    Evaluators must be pure; a model is immutable and may be shared across
    threads.
    """
    nu: int
    mu: int
    f: Evaluator
    g: Evaluator
    jac: Optional[JacobianEvaluator] = None
    name: str = "dae"
    state_names: Tuple[str, ...] = ()
    algebraic_names: Tuple[str, ...] = ()
    params: Mapping[str, float] = field(default_factory=dict)
    default_guess: Optional[Tuple[np.ndarray, np.ndarray]] = None

    def __post_init__(self):
        if self.nu < 1 or self.mu < 0:
            raise ParameterError(f"Invalid model dimensions nu={self.nu}, mu={self.mu}")
        if not self.state_names:
            object.__setattr__(self, "state_names", tuple(f"x{k + 1}" for k in range(self.nu)))
        if not self.algebraic_names:
            object.__setattr__(self, "algebraic_names", tuple(f"y{k + 1}" for k in range(self.mu)))


def _as_vector(value, size: int, label: str) -> np.ndarray:
    vector = np.asarray(value, dtype=float).reshape(-1) if np.ndim(value) else np.asarray([value], dtype=float)
    if vector.shape != (size,):
        raise ConformanceError(f"{label} has length {vector.size}, expected {size}")
    return vector


def eval_residuals(model: DaeModel, x, y) -> Tuple[np.ndarray, np.ndarray]:
    """
    Evaluate f(x, y) and g(x, y).

    Raises:
        ConformanceError: x, y or the returned residuals have the wrong length
    """
    x = _as_vector(x, model.nu, "x")
    y = _as_vector(y, model.mu, "y") if model.mu else np.zeros(0)
    f = np.asarray(model.f(x, y), dtype=float).reshape(-1)
    g = np.asarray(model.g(x, y), dtype=float).reshape(-1) if model.mu else np.zeros(0)
    if f.shape != (model.nu,):
        raise ConformanceError(f"f returned length {f.size}, expected {model.nu}")
    if g.shape != (model.mu,):
        raise ConformanceError(f"g returned length {g.size}, expected {model.mu}")
    return f, g


def _stacked_residual(model: DaeModel, z: np.ndarray) -> np.ndarray:
    f, g = eval_residuals(model, z[:model.nu], z[model.nu:])
    return np.concatenate([f, g])


def _finite_difference(model: DaeModel, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Central differences of [f; g] with step 1e-6 * max(1, |z_k|)."""
    z = np.concatenate([x, y])
    n = z.size
    jac = np.empty((n, n))
    for k in range(n):
        step = FD_REL_STEP * max(1.0, abs(z[k]))
        z_plus, z_minus = z.copy(), z.copy()
        z_plus[k] += step
        z_minus[k] -= step
        r_plus = _stacked_residual(model, z_plus)
        r_minus = _stacked_residual(model, z_minus)
        if not (np.all(np.isfinite(r_plus)) and np.all(np.isfinite(r_minus))):
            raise EvaluationError(
                f"Non-finite residuals while differencing component {k} of {model.name}")
        jac[:, k] = (r_plus - r_minus) / (2.0 * step)
    return jac


def jacobians(model: DaeModel, x, y, mode: str = "auto") -> JacobianSet:
    """
    Evaluate the Jacobian blocks at (x, y).

    Args:
        model: DAE model
        x, y: Evaluation point
        mode: "analytic", "finite-difference", or "auto" (analytic when the
            model provides it)

    Raises:
        ParameterError: analytic mode requested for a model without Jacobians
        EvaluationError: non-finite residuals while differencing
    """
    x = _as_vector(x, model.nu, "x")
    y = _as_vector(y, model.mu, "y") if model.mu else np.zeros(0)
    if mode == "auto":
        mode = "analytic" if model.jac is not None else "finite-difference"

    nu, mu = model.nu, model.mu
    if mode == "analytic":
        if model.jac is None:
            raise ParameterError(f"Model {model.name} has no analytic Jacobian")
        f_x, f_y, g_x, g_y = (np.asarray(block, dtype=float) for block in model.jac(x, y))
        f_y, g_x, g_y = f_y.reshape(nu, mu), g_x.reshape(mu, nu), g_y.reshape(mu, mu)
    elif mode == "finite-difference":
        full = _finite_difference(model, x, y)
        f_x, f_y = full[:nu, :nu], full[:nu, nu:]
        g_x, g_y = full[nu:, :nu], full[nu:, nu:]
    else:
        raise ParameterError(f"Unknown Jacobian mode '{mode}'")

    return JacobianSet(f_x=f_x, f_y=f_y, g_x=g_x, g_y=g_y,
                       x_o=x.copy(), y_o=y.copy(), name=model.name)


def find_equilibrium(model: DaeModel, guess: Optional[Tuple[Any, Any]] = None,
                     tol: float = 1e-10, max_iter: int = 50) -> StationaryPoint:
    """
    Newton iteration on the stacked residual [f; g] = 0.

    Args:
        model: DAE model
        guess: Initial (x, y); the model's default guess when omitted
        tol: Convergence tolerance on max(|f|_inf, |g|_inf)
        max_iter: Iteration cap

    Raises:
        NoEquilibriumError: divergence, singular iteration matrix or no
            convergence within max_iter
    """
    if guess is None:
        if model.default_guess is None:
            guess = (np.zeros(model.nu), np.zeros(model.mu))
        else:
            guess = model.default_guess
    x0 = _as_vector(guess[0], model.nu, "guess x")
    y0 = _as_vector(guess[1], model.mu, "guess y") if model.mu else np.zeros(0)

    z = np.concatenate([x0, y0])
    residual = _stacked_residual(model, z)
    norm = float(np.max(np.abs(residual))) if residual.size else 0.0

    for iteration in range(max_iter + 1):
        if not np.isfinite(norm):
            raise NoEquilibriumError(f"Newton diverged for {model.name}", residual_norm=norm)
        if norm <= tol:
            logger.debug(f"Equilibrium of {model.name} found in {iteration} iterations "
                         f"(residual {norm:.3e})")
            return StationaryPoint(x_o=z[:model.nu].copy(), y_o=z[model.nu:].copy(),
                                   residual_norm=norm, iterations=iteration)
        if iteration == max_iter:
            break
        full = jacobians(model, z[:model.nu], z[model.nu:]).full()
        try:
            dz = la.solve(full, -residual)
        except (la.LinAlgError, ValueError) as e:
            raise NoEquilibriumError(
                f"Singular Newton matrix while solving equilibrium of {model.name}: {e}",
                residual_norm=norm) from e
        z = z + dz
        residual = _stacked_residual(model, z)
        norm = float(np.max(np.abs(residual)))

    raise NoEquilibriumError(
        f"No equilibrium for {model.name} after {max_iter} Newton iterations "
        f"(last residual {norm:.3e})", residual_norm=norm)


def solve_algebraic(model: DaeModel, x, y_guess, tol: float = 1e-12,
                    max_iter: int = 25) -> np.ndarray:
    """
    Solve g(x, y) = 0 for y with x held fixed.

    Raises:
        NoEquilibriumError: the algebraic Newton iteration failed
    """
    x = _as_vector(x, model.nu, "x")
    y = _as_vector(y_guess, model.mu, "y") if model.mu else np.zeros(0)
    if model.mu == 0:
        return y
    for _ in range(max_iter + 1):
        _, g = eval_residuals(model, x, y)
        norm = float(np.max(np.abs(g)))
        if not np.isfinite(norm):
            break
        if norm <= tol:
            return y
        g_y = jacobians(model, x, y).g_y
        try:
            y = y + la.solve(g_y, -g)
        except (la.LinAlgError, ValueError) as e:
            raise NoEquilibriumError(f"Singular g_y in algebraic solve: {e}", residual_norm=norm) from e
    raise NoEquilibriumError("Algebraic variables did not converge", residual_norm=norm)


# ---------------------------------------------------------------------------
# Built-in models
# ---------------------------------------------------------------------------

def builtin_smib(H: float = 3.5, D: float = 1.0, X: float = 0.5, E: float = 1.0,
                 V: float = 1.0, P_m: float = 0.8, omega_b: float = 2 * math.pi * 60) -> DaeModel:
    """
    Classical single-machine infinite-bus model.

    States (delta, omega), algebraic P_e:
        delta' = omega_b (omega - 1)
        omega' = (P_m - P_e - D (omega - 1)) / (2H)
        0      = P_e - (E V / X) sin(delta)
    """
    if H <= 0 or X <= 0:
        raise ParameterError(f"SMIB requires H > 0 and X > 0 (got H={H}, X={X})")
    k = E * V / X

    def f(x, y):
        return np.array([omega_b * (x[1] - 1.0),
                         (P_m - y[0] - D * (x[1] - 1.0)) / (2 * H)])

    def g(x, y):
        return np.array([y[0] - k * math.sin(x[0])])

    def jac(x, y):
        f_x = np.array([[0.0, omega_b], [0.0, -D / (2 * H)]])
        f_y = np.array([[0.0], [-1.0 / (2 * H)]])
        g_x = np.array([[-k * math.cos(x[0]), 0.0]])
        g_y = np.array([[1.0]])
        return f_x, f_y, g_x, g_y

    return DaeModel(
        nu=2, mu=1, f=f, g=g, jac=jac, name="smib",
        state_names=("delta", "omega"), algebraic_names=("P_e",),
        params=dict(H=H, D=D, X=X, E=E, V=V, P_m=P_m, omega_b=omega_b),
        default_guess=(np.array([0.3, 1.0]), np.array([0.7])),
    )


def builtin_smib3(H: float = 3.5, D: float = 1.0, X_d: float = 1.2, X_d_prime: float = 0.3,
                  X_e: float = 0.2, T_d0: float = 5.0, E_fd: float = 2.0, V: float = 1.0,
                  P_m: float = 0.8, omega_b: float = 2 * math.pi * 60) -> DaeModel:
    """
    Single-machine infinite-bus model with flux decay.

    States (delta, omega, e_q), algebraic (P_e, i_d), X't = X'_d + X_e:
        e_q' = (E_fd - e_q - (X_d - X'_d) i_d) / T'_d0
        0    = P_e - e_q V sin(delta) / X't
        0    = i_d - (e_q - V cos(delta)) / X't
    """
    x_t = X_d_prime + X_e
    if H <= 0 or T_d0 <= 0 or x_t <= 0 or X_d <= 0:
        raise ParameterError(
            f"SMIB3 requires H, T_d0, X_d and X'_d + X_e positive (got H={H}, T_d0={T_d0}, X't={x_t})")
    x_sync = X_d - X_d_prime

    def f(x, y):
        return np.array([omega_b * (x[1] - 1.0),
                         (P_m - y[0] - D * (x[1] - 1.0)) / (2 * H),
                         (E_fd - x[2] - x_sync * y[1]) / T_d0])

    def g(x, y):
        return np.array([y[0] - x[2] * V * math.sin(x[0]) / x_t,
                         y[1] - (x[2] - V * math.cos(x[0])) / x_t])

    def jac(x, y):
        delta, e_q = x[0], x[2]
        f_x = np.array([[0.0, omega_b, 0.0],
                        [0.0, -D / (2 * H), 0.0],
                        [0.0, 0.0, -1.0 / T_d0]])
        f_y = np.array([[0.0, 0.0],
                        [-1.0 / (2 * H), 0.0],
                        [0.0, -x_sync / T_d0]])
        g_x = np.array([[-e_q * V * math.cos(delta) / x_t, 0.0, -V * math.sin(delta) / x_t],
                        [-V * math.sin(delta) / x_t, 0.0, -1.0 / x_t]])
        g_y = np.eye(2)
        return f_x, f_y, g_x, g_y

    return DaeModel(
        nu=3, mu=2, f=f, g=g, jac=jac, name="smib3",
        state_names=("delta", "omega", "e_q"), algebraic_names=("P_e", "i_d"),
        params=dict(H=H, D=D, X_d=X_d, X_d_prime=X_d_prime, X_e=X_e, T_d0=T_d0,
                    E_fd=E_fd, V=V, P_m=P_m, omega_b=omega_b),
        default_guess=(np.array([0.3, 1.0, 1.3]), np.array([0.8, 0.75])),
    )


def builtin_stiff_chain(n_slow: int = 1, n_fast: int = 1, s_min: float = -1.0,
                        s_max: float = -100.0, coupling: float = 0.0) -> DaeModel:
    """
    Linear chain with log-spaced open-loop rates and one algebraic aggregate.

    Rates lambda_k run geometrically from s_min to s_max; the first n_slow
    states are the slow ones. With c = coupling:
        x_1' = lambda_1 x_1 - c y
        x_k' = lambda_k x_k - c x_{k-1}      (k >= 2)
        0    = sum_k x_k - y
    c = 0 leaves f_x diagonal and A = f_x.
    """
    n_slow, n_fast = int(n_slow), int(n_fast)
    if n_slow < 0 or n_fast < 0 or n_slow + n_fast < 2:
        raise ParameterError(f"stiff chain needs n_slow, n_fast >= 0 and n_slow + n_fast >= 2 "
                             f"(got {n_slow}, {n_fast})")
    if s_min >= 0 or s_max >= 0:
        raise ParameterError(f"stiff chain rates must be negative (got s_min={s_min}, s_max={s_max})")
    if coupling < 0:
        raise ParameterError(f"coupling must be non-negative (got {coupling})")

    nu = n_slow + n_fast
    rates = np.geomspace(s_min, s_max, nu)
    f_x = np.diag(rates)
    f_y = np.zeros((nu, 1))
    if coupling:
        f_x[np.arange(1, nu), np.arange(nu - 1)] = -coupling
        f_y[0, 0] = -coupling
    g_x = np.ones((1, nu))
    g_y = np.array([[-1.0]])

    def f(x, y):
        return f_x @ x + f_y @ y

    def g(x, y):
        return g_x @ x + g_y @ y

    def jac(x, y):
        return f_x.copy(), f_y.copy(), g_x.copy(), g_y.copy()

    return DaeModel(
        nu=nu, mu=1, f=f, g=g, jac=jac, name="stiff-chain",
        algebraic_names=("y",),
        params=dict(n_slow=n_slow, n_fast=n_fast, s_min=s_min, s_max=s_max, coupling=coupling),
        default_guess=(np.zeros(nu), np.zeros(1)),
    )


BUILTIN_MODELS: Dict[str, Callable[..., DaeModel]] = {
    "smib": builtin_smib,
    "smib3": builtin_smib3,
    "stiff-chain": builtin_stiff_chain,
}


def build_builtin(name: str, params: Optional[Mapping[str, float]] = None) -> DaeModel:
    """Build a built-in model by name with parameter overrides."""
    factory = BUILTIN_MODELS.get(name)
    if factory is None:
        raise ParameterError(f"Unknown model '{name}' (known: {', '.join(BUILTIN_MODELS)})")
    try:
        return factory(**dict(params or {}))
    except TypeError as e:
        raise ParameterError(f"Invalid parameter for model '{name}': {e}") from e


def linear_dae(jac_set: JacobianSet) -> DaeModel:
    """
    Wrap a JacobianSet as a linear DAE in deviation variables:
    f = f_x x + f_y y, g = g_x x + g_y y.
    """
    f_x, f_y, g_x, g_y = jac_set.f_x, jac_set.f_y, jac_set.g_x, jac_set.g_y

    def f(x, y):
        return f_x @ x + f_y @ y

    def g(x, y):
        return g_x @ x + g_y @ y

    def jac(x, y):
        return f_x, f_y, g_x, g_y

    return DaeModel(nu=jac_set.nu, mu=jac_set.mu, f=f, g=g, jac=jac,
                    name=f"{jac_set.name}-linear",
                    default_guess=(np.zeros(jac_set.nu), np.zeros(jac_set.mu)))


# ---------------------------------------------------------------------------
# Linear model files
# ---------------------------------------------------------------------------

def _read_matrix(data: Dict[str, Any], key: str, shape: Tuple[int, int]) -> np.ndarray:
    if key not in data:
        if 0 in shape:
            return np.zeros(shape)
        raise ModelFileError(f"Missing key '{key}'")
    try:
        matrix = np.array(data[key], dtype=float)
    except (TypeError, ValueError) as e:
        raise ModelFileError(f"'{key}' is not a numeric matrix: {e}") from e
    if 0 in shape and matrix.size == 0:
        return np.zeros(shape)
    if matrix.shape != shape:
        raise ModelFileError(f"'{key}' has shape {matrix.shape}, expected {shape}")
    if not np.all(np.isfinite(matrix)):
        raise ModelFileError(f"'{key}' contains non-finite entries")
    return matrix


def _read_vector(data: Dict[str, Any], key: str, size: int) -> np.ndarray:
    if key not in data:
        return np.zeros(size)
    vector = _read_matrix({key: [data[key]]}, key, (1, size))
    return vector[0]


def load_linear_model(path) -> JacobianSet:
    """
    Load a linearized model from the JSON schema:
    {"nu", "mu", "f_x", "f_y", "g_x", "g_y", "name"?, "x0"?, "y0"?}.
    f_y, g_x, g_y may be omitted when mu = 0.

    Raises:
        ModelFileAccessError: the file cannot be opened or read
        ModelFileError: parse error, dimension mismatch or non-finite entries
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ModelFileAccessError(f"Cannot read linear model {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFileError(f"Cannot parse {path}: {e}") from e
    jac_set = parse_linear_model(data, default_name=path.stem)
    logger.info(f"Loaded linear model {path} (nu={jac_set.nu}, mu={jac_set.mu})")
    return jac_set


def parse_linear_model(data: Any, default_name: str = "linear") -> JacobianSet:
    """
    Build a JacobianSet from a decoded linear model object.

    Raises:
        ModelFileError: missing keys, dimension mismatch or non-finite entries
    """
    if not isinstance(data, dict):
        raise ModelFileError("A linear model must be a JSON object")

    try:
        nu, mu = int(data["nu"]), int(data["mu"])
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFileError(f"A linear model needs integer 'nu' and 'mu': {e}") from e
    if nu < 1 or mu < 0:
        raise ModelFileError(f"Invalid dimensions nu={nu}, mu={mu}")

    f_x = _read_matrix(data, "f_x", (nu, nu))
    f_y = _read_matrix(data, "f_y", (nu, mu))
    g_x = _read_matrix(data, "g_x", (mu, nu))
    g_y = _read_matrix(data, "g_y", (mu, mu))
    x0 = _read_vector(data, "x0", nu)
    y0 = _read_vector(data, "y0", mu) if mu else np.zeros(0)

    return JacobianSet(f_x=f_x, f_y=f_y, g_x=g_x, g_y=g_y, x_o=x0, y_o=y0,
                       name=str(data.get("name", default_name)))


def jacobian_to_dict(jac_set: JacobianSet) -> Dict[str, Any]:
    """Serialize a JacobianSet to the linear model JSON schema."""
    data: Dict[str, Any] = {"name": jac_set.name, "nu": jac_set.nu, "mu": jac_set.mu,
                            "f_x": jac_set.f_x.tolist()}
    if jac_set.mu:
        data["f_y"] = jac_set.f_y.tolist()
        data["g_x"] = jac_set.g_x.tolist()
        data["g_y"] = jac_set.g_y.tolist()
    data["x0"] = jac_set.x_o.tolist()
    if jac_set.mu:
        data["y0"] = jac_set.y_o.tolist()
    return data
