"""
Method and Solver Models

Pydantic models describing a time-domain integration method and the
Newton settings used when stepping nonlinear models.
"""

import re
from enum import Enum
from typing import Annotated, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..utils.exceptions import ParameterError


class MethodKind(str, Enum):
    """Supported integration schemes and their aliases."""
    THETA = "theta"
    BEM = "bem"
    TM = "tm"
    DIRK2S = "dirk2s"
    HEUN = "heun"
    FEM = "fem"


_METHOD_PATTERN = re.compile(r"^(?P<kind>[a-z0-9]+)(?::(?P<arg>[^:]+))?$")
_NO_ARGUMENT = (MethodKind.BEM, MethodKind.TM, MethodKind.DIRK2S, MethodKind.FEM)


class MethodSpec(BaseModel):
    """
    A TDI method with its parameters and (optionally) its step size.

    Attributes:
        kind: Method family or alias
        h: Step size in seconds; may be left unset for a method template
        theta: Theta parameter in [0, 0.5], Theta family only
        r: Number of corrector passes, Heun only
    """
    model_config = ConfigDict(frozen=True)

    kind: MethodKind
    h: Annotated[Optional[float], Field(gt=0, description="Step size (s)")] = None
    theta: Annotated[Optional[float], Field(ge=0.0, le=0.5, description="Theta in [0, 0.5]")] = None
    r: Annotated[Optional[int], Field(ge=0, description="Heun corrector passes")] = None

    @model_validator(mode="after")
    def check_parameters(self):
        """Ensure each kind carries exactly the parameters it needs."""
        if self.kind is MethodKind.THETA and self.theta is None:
            raise ValueError("theta method requires a theta value, e.g. 'theta:0.47'")
        if self.kind is MethodKind.HEUN and self.r is None:
            raise ValueError("heun method requires a corrector count, e.g. 'heun:2'")
        if self.kind is not MethodKind.THETA and self.theta is not None:
            raise ValueError(f"'{self.kind.value}' does not take a theta value")
        if self.kind is not MethodKind.HEUN and self.r is not None:
            raise ValueError(f"'{self.kind.value}' does not take a corrector count")
        return self

    @classmethod
    def parse(cls, text: str, h: Optional[float] = None) -> "MethodSpec":
        """
        Parse the method grammar used on the command line.

        Accepted forms: "theta:0.47", "bem", "tm", "dirk2s", "heun:1",
        "heun:2", "fem".

        Raises:
            ParameterError: Unknown method or invalid parameter
        """
        match = _METHOD_PATTERN.match(text.strip().lower())
        if not match:
            raise ParameterError(f"Cannot parse method '{text}'")
        try:
            kind = MethodKind(match.group("kind"))
        except ValueError:
            known = ", ".join(k.value for k in MethodKind)
            raise ParameterError(f"Unknown method '{match.group('kind')}' (known: {known})")

        arg = match.group("arg")
        if kind in _NO_ARGUMENT and arg is not None:
            raise ParameterError(f"Method '{kind.value}' does not take a parameter")

        try:
            if kind is MethodKind.THETA:
                return cls(kind=kind, h=h, theta=float(arg) if arg is not None else None)
            if kind is MethodKind.HEUN:
                return cls(kind=kind, h=h, r=int(arg) if arg is not None else None)
            return cls(kind=kind, h=h)
        except (ValidationError, ValueError) as e:
            raise ParameterError(f"Invalid method '{text}': {e}") from e

    def resolved(self) -> "MethodSpec":
        """Return the canonical form: BEM -> Theta(0), TM -> Theta(0.5), FEM -> Heun(0)."""
        if self.kind is MethodKind.BEM:
            return MethodSpec(kind=MethodKind.THETA, h=self.h, theta=0.0)
        if self.kind is MethodKind.TM:
            return MethodSpec(kind=MethodKind.THETA, h=self.h, theta=0.5)
        if self.kind is MethodKind.FEM:
            return MethodSpec(kind=MethodKind.HEUN, h=self.h, r=0)
        return self

    def with_step(self, h: float) -> "MethodSpec":
        """Bind a step size."""
        try:
            return MethodSpec(kind=self.kind, h=h, theta=self.theta, r=self.r)
        except ValidationError as e:
            raise ParameterError(f"Invalid step size {h}: {e}") from e

    def require_step(self) -> float:
        if self.h is None:
            raise ParameterError(f"Method '{self.label}' has no step size")
        return self.h

    @property
    def label(self) -> str:
        """The method string in command-line grammar."""
        if self.kind is MethodKind.THETA:
            return f"theta:{self.theta:g}"
        if self.kind is MethodKind.HEUN:
            return f"heun:{self.r}"
        return self.kind.value


class SolverConfig(BaseModel):
    """
    Newton settings for time stepping.

    Attributes:
        newton_tol: Convergence tolerance on the infinity norm of the residual
        max_newton: Maximum Newton iterations per implicit solve
        consistency_tol: Allowed algebraic residual of initial conditions
        h: Step size, used when the method carries none
    """
    model_config = ConfigDict(frozen=True)

    newton_tol: Annotated[float, Field(gt=0)] = 1e-12
    max_newton: Annotated[int, Field(ge=1)] = 25
    consistency_tol: Annotated[float, Field(gt=0)] = 1e-8
    h: Annotated[Optional[float], Field(gt=0)] = None
