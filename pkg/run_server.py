#!/usr/bin/env python3
"""
Simple server runner for the modeshape analysis service
"""
import sys
import uvicorn
from pathlib import Path

# Ensure the project root is importable
sys.path.insert(0, str(Path(__file__).parent))

if __name__ == "__main__":
    from src.main import app, service_config

    port = int(service_config.get('port', 8000))
    print(f"Starting Modeshape Analysis Service on port {port}...")
    print("Available endpoints:")
    print("  - Eigen-analysis: POST /analyze")
    print("  - Deformation at one step: POST /deform")
    print("  - Maximum admissible step: POST /hmax")
    print("  - Step-size sweep (background job): POST /sweep")
    print("  - Job status: GET /status/{job_id}")
    print("  - Health Check: GET /health")
    print("  - Service Info: GET /")
    print()

    uvicorn.run(
        app,
        host=service_config.get('host', "0.0.0.0"),
        port=port,
        log_level="info"
    )
