"""
Modeshape Analysis Service API

FastAPI-based service exposing the eigenvalue and mode-shape deformation
analyses. Sweeps run as background jobs; the other commands answer
synchronously.
"""

import asyncio
import os
import uuid
from datetime import datetime, timezone
from typing import Dict

import uvicorn
from fastapi import BackgroundTasks, FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from src.analysis.deformation import SWEEP_COLUMNS
from src.models.request_models import JobStatusResponse, RunConfig
from src.service.analysis_service import AnalysisService, deformation_payload, hmax_payload
from src.service.config import Config
from src.utils.env_loader import load_root_env
from src.utils.exceptions import ConfigError, ConformanceError, ModeshapeError, ParameterError
from src.utils.logger import setup_logger
from src.utils.report_writer import to_jsonable

# Bootstrap sink, replaced once the config is read
setup_logger()
load_root_env()
config = Config()
service_config = config.get_service_config()
logging_config = config.get_logging_config()
logger = setup_logger(logging_config.get('level'), logging_config.get('log_dir'),
                      logging_config.get('file_rotation', '1 day'),
                      logging_config.get('file_retention', '7 days'))

# Initialize FastAPI app
app = FastAPI(
    title=service_config.get('name', "Modeshape Analysis Service"),
    version=service_config.get('version', "1.0.0"),
    description="Eigenvalue and participation-factor deformation of DAE models under numerical integration"
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["http://localhost:3000", "http://localhost:5173"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# In-memory store for tracking job status
job_status: Dict[str, dict] = {}


def _http_error(e: ModeshapeError) -> HTTPException:
    """Map analysis errors to HTTP status codes."""
    status = 422 if isinstance(e, (ParameterError, ConfigError, ConformanceError)) else 400
    return HTTPException(status_code=status, detail=f"{type(e).__name__}: {e.message}")


def _digits() -> int:
    return int(config.get('analysis.float_digits', 12))


def _run_sync(request: RunConfig, command):
    """Run a service command and translate failures into HTTP errors."""
    try:
        return command(AnalysisService(request, config))
    except ModeshapeError as e:
        logger.warning(f"Request failed: {e.message}")
        raise _http_error(e)
    except Exception as e:
        logger.error(f"Unexpected error: {str(e)}")
        raise HTTPException(status_code=500, detail=f"Internal server error: {str(e)}")


@app.get("/")
async def root():
    """Root endpoint providing service information."""
    return {
        "message": "Modeshape Analysis Service is running",
        "version": service_config.get('version', "1.0.0"),
        "endpoints": {
            "health": "/health",
            "analyze": "/analyze",
            "deform": "/deform",
            "hmax": "/hmax",
            "sweep": "/sweep",
            "status": "/status/{job_id}",
            "jobs": "/jobs"
        }
    }


@app.get("/health")
async def health_check():
    """Health check endpoint for monitoring."""
    return {"status": "healthy", "service": "modeshape"}


@app.post("/analyze")
async def analyze(request: RunConfig):
    """
    Eigen-analysis of a linearized model.

    Args:
        request: Model source and analysis options

    Returns:
        Eigenvalues, participation factors, stiffness ratio and stability
    """
    result = _run_sync(request, lambda service: service.analyze())
    return to_jsonable(result.to_dict(), _digits())


@app.post("/deform")
async def deform(request: RunConfig):
    """
    Eigenvalue and mode-shape deformation at a single step size.

    Args:
        request: Model source, method and step size

    Returns:
        Per-mode deformation metrics and discrete stability
    """
    def command(service: AnalysisService):
        report = service.deform()
        return deformation_payload(report, service.resolve_model().state_names)

    return to_jsonable(_run_sync(request, command), _digits())


@app.post("/hmax")
async def hmax(request: RunConfig):
    """
    Maximum admissible step size under eps_s / eps_p thresholds.

    Args:
        request: Model source, method, grid and thresholds

    Returns:
        One result per criterion set ("infinity" when unbounded)
    """
    results = _run_sync(request, lambda service: service.hmax())
    return to_jsonable(hmax_payload(results), _digits())


@app.post("/sweep")
async def start_sweep(request: RunConfig, background_tasks: BackgroundTasks):
    """
    Start a step-size sweep as a background job.

    Args:
        request: Model source, method and grid
        background_tasks: FastAPI background tasks handler

    Returns:
        Job information including job_id for status tracking
    """
    job_id = str(uuid.uuid4())

    # Initialize job status
    job_status[job_id] = JobStatusResponse(
        job_id=job_id,
        status="started",
        message="Sweep job started",
        command="sweep",
        created_at=datetime.now(timezone.utc).isoformat(),
    ).model_dump()

    background_tasks.add_task(run_sweep, job_id, request)
    logger.info(f"Started sweep job {job_id} for {request.model or request.linear or 'inline model'}")

    return {"job_id": job_id, "status": "started", "message": "Sweep started"}


@app.get("/status/{job_id}")
async def get_job_status(job_id: str):
    """
    Get status of a sweep job.

    Args:
        job_id: Unique identifier for the job

    Returns:
        Current job status and results
    """
    if job_id not in job_status:
        raise HTTPException(status_code=404, detail="Job not found")

    return job_status[job_id]


@app.get("/jobs")
async def list_jobs():
    """
    List all jobs and their current status.

    Returns:
        Dictionary of all jobs with their status information
    """
    return {"jobs": job_status, "total_jobs": len(job_status)}


async def run_sweep(job_id: str, request: RunConfig):
    """
    Background task running a sweep in the default executor.

    Args:
        job_id: Unique identifier for the job
        request: Sweep configuration
    """
    try:
        job_status[job_id]["status"] = "processing"
        job_status[job_id]["message"] = "Evaluating step-size grid..."

        service = AnalysisService(request, config)
        loop = asyncio.get_running_loop()
        frame = await loop.run_in_executor(None, service.sweep)
        rows = frame[SWEEP_COLUMNS[:8]].to_dict(orient="records")

        job_status[job_id]["status"] = "completed"
        job_status[job_id]["message"] = f"Sweep completed with {len(rows)} rows"
        job_status[job_id]["result"] = to_jsonable({"rows": rows}, _digits())

        logger.info(f"Job {job_id} completed successfully")

    except Exception as e:
        job_status[job_id]["status"] = "failed"
        job_status[job_id]["message"] = f"Error: {str(e)}"
        job_status[job_id]["error"] = str(e)

        logger.error(f"Job {job_id} failed: {str(e)}")


def main():
    """Main entry point for the service."""
    port = int(os.environ.get('PORT', service_config.get('port', 8000)))
    uvicorn.run(
        app,
        host=service_config.get('host', "0.0.0.0"),
        port=port,
        log_level="info"
    )


if __name__ == '__main__':
    main()
