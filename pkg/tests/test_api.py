import httpx
import pytest
from fastapi.testclient import TestClient

from src.main import app

client = TestClient(app)


def test_health_and_root():
    assert client.get("/health").json() == {"status": "healthy", "service": "modeshape"}
    assert "sweep" in client.get("/").json()["endpoints"]
    assert app.title == "Modeshape Analysis Service"


def test_analyze_builtin_model():
    response = client.post("/analyze", json={"model": "smib"})
    assert response.status_code == 200
    body = response.json()
    assert body["stable"] is True
    assert len(body["eigenvalues"]) == 2
    assert body["stiffness_ratio"] == pytest.approx(1.0)


def test_analyze_inline_linear_model():
    response = client.post("/analyze", json={"jacobian": {"nu": 2, "mu": 0,
                                                          "f_x": [[0.1, 0.0], [0.0, -1.0]]}})
    assert response.status_code == 200
    assert response.json()["stable"] is False


def test_deform_reports_modes():
    response = client.post("/deform", json={"model": "smib", "method": "heun:2", "h": 0.01})
    assert response.status_code == 200
    body = response.json()
    assert body["method"] == "heun:2"
    assert set(body["modes"][0]["eps_p_pct"]) == {"delta", "omega"}


def test_deform_without_step_size():
    assert client.post("/deform", json={"model": "smib", "method": "tm"}).status_code == 400


def test_invalid_requests_are_rejected():
    assert client.post("/analyze", json={"model": "smib", "linear": "m.json"}).status_code == 422
    assert client.post("/deform", json={"model": "smib", "method": "theta:0.6",
                                        "h": 0.01}).status_code == 422
    assert client.post("/analyze", json={"model": "unknown"}).status_code == 422


def test_hmax_unbounded():
    response = client.post("/hmax", json={"model": "smib", "method": "tm", "eps_s": 5.0,
                                          "hgrid": [0.001, 0.01, 0.1]})
    assert response.status_code == 200
    assert response.json()["results"][0]["hmax"] == "infinity"


def test_unknown_job():
    assert client.get("/status/does-not-exist").status_code == 404


def test_sweep_job_completes():
    response = client.post("/sweep", json={"model": "smib", "method": "heun:2",
                                           "hgrid": [0.001, 0.01]})
    assert response.status_code == 200
    job_id = response.json()["job_id"]
    status = client.get(f"/status/{job_id}").json()
    assert status["status"] == "completed"
    assert len(status["result"]["rows"]) == 8
    assert job_id in client.get("/jobs").json()["jobs"]


@pytest.mark.asyncio
async def test_analyze_async_client():
    transport = httpx.ASGITransport(app=app)
    async with httpx.AsyncClient(transport=transport, base_url="http://test") as async_client:
        response = await async_client.post("/analyze", json={"model": "smib3"})
    assert response.status_code == 200
    assert len(response.json()["eigenvalues"]) == 3
