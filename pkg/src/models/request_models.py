"""
Request Models for the Modeshape CLI and API

Defines the run configuration shared by every command and HTTP endpoint,
and the job status response of background sweeps.
"""

from typing import Annotated, Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from .method_models import MethodSpec


class RunConfig(BaseModel):
    """
    Model for one analysis run.

    Attributes:
        model: Built-in model name (smib, smib3, stiff-chain)
        linear: Path of a linear model JSON file
        jacobian: Inline linear model in the file schema (API only)
        params: Built-in model parameter overrides
        method: Method string, e.g. "tm", "theta:0.47", "heun:2"
        h: Step size for deform and simulate
        hmin, hmax, hpoints: Log-spaced step-size grid
        hgrid: Explicit ascending step-size grid
        eps_s, eps_p: h^max thresholds in percent
        table: Evaluate the four standard threshold scenarios
        n_modes: Number of least damped modes tracked
        top_pf: Number of highest-participation states per mode
        pf_floor: Participation below which eps_p is undefined
        t_end: Simulation end time
        perturb: Additive initial-state perturbations by state name
        consistency_solve: Re-solve inconsistent initial algebraic variables
        out: Output file path
        format: Output format
        workers: Concurrent grid points in sweeps
    """
    model: Annotated[Optional[str], Field(description="Built-in model name")] = None
    linear: Annotated[Optional[str], Field(description="Linear model JSON path")] = None
    jacobian: Annotated[Optional[Dict[str, Any]], Field(description="Inline linear model")] = None
    params: Dict[str, float] = Field(default_factory=dict)
    method: Annotated[str, Field(description="Method, e.g. 'tm', 'theta:0.47', 'heun:2'")] = "tm"
    h: Annotated[Optional[float], Field(gt=0, description="Step size (s)")] = None
    hmin: Annotated[Optional[float], Field(gt=0)] = None
    hmax: Annotated[Optional[float], Field(gt=0)] = None
    hpoints: Annotated[Optional[int], Field(ge=2, description="Grid points (>= 2)")] = None
    hgrid: Optional[List[Annotated[float, Field(gt=0)]]] = None
    eps_s: Annotated[Optional[float], Field(gt=0, description="Max eps_s (%)")] = None
    eps_p: Annotated[Optional[float], Field(gt=0, description="Max |eps_p| (%)")] = None
    table: bool = False
    n_modes: Annotated[Optional[int], Field(ge=1)] = None
    top_pf: Annotated[Optional[int], Field(ge=1)] = None
    pf_floor: Annotated[Optional[float], Field(gt=0)] = None
    t_end: Annotated[Optional[float], Field(ge=0, description="Simulation end time (s)")] = None
    perturb: Dict[str, float] = Field(default_factory=dict)
    consistency_solve: bool = False
    out: Optional[str] = None
    format: Literal["csv", "json"] = "csv"
    workers: Annotated[Optional[int], Field(ge=1)] = None

    @field_validator('model')
    def validate_model(cls, v):
        """Normalize the model name."""
        return v.strip().lower() if v is not None else v

    @field_validator('method')
    def validate_method(cls, v):
        """Reject methods the grammar cannot parse (e.g. theta:0.6)."""
        MethodSpec.parse(v)
        return v.strip().lower()

    @field_validator('hgrid')
    def validate_hgrid(cls, v):
        """Explicit grids must be strictly ascending."""
        if v is not None and any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError('hgrid must be strictly ascending')
        return v

    @model_validator(mode='after')
    def validate_sources(self):
        """Exactly one model source; grid bounds ordered."""
        sources = [s for s in (self.model, self.linear, self.jacobian) if s is not None]
        if len(sources) != 1:
            raise ValueError('exactly one of model, linear or jacobian must be given')
        if self.hmin is not None and self.hmax is not None and self.hmin >= self.hmax:
            raise ValueError('hmin must be smaller than hmax')
        return self

    def method_spec(self) -> MethodSpec:
        return MethodSpec.parse(self.method, h=self.h)

    model_config = {
        "json_schema_extra": {
            "example": {
                "model": "smib",
                "method": "heun:2",
                "hmin": 1e-4,
                "hmax": 1e-1,
                "hpoints": 20,
                "eps_s": 5.0,
                "eps_p": 5.0,
            }
        }
    }


class JobStatusResponse(BaseModel):
    """
    Model for job status response.

    Attributes:
        job_id: Unique identifier for the job
        status: Current status of the job
        message: Human-readable status message
        command: Command run by the job
        result: Results of the run (if completed)
        error: Error message (if failed)
    """
    job_id: str
    status: str  # started, processing, completed, failed
    message: str
    command: str
    result: Optional[dict] = None
    error: Optional[str] = None
    created_at: Optional[str] = None
