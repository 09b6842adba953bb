"""FastAPI application wrapping the optimization core.

All bodies are JSON; errors are rendered as {"code", "message"}. Runs
execute on a background job queue and are polled via GET /runs/{id}.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..grid_physics import GridError
from ..orchestrate import (
    ConfigError,
    RunConfig,
    SynthSpec,
    emit_solution,
    result_rows,
    result_to_summary,
    synthesize_system,
)
from ..reporting import compare_baselines, report_json_doc
from ..topology import TopologyError, load_topology, system_to_document
from .jobs import JobRecord, JobStore
from .models import HealthResponse, RunCreated, RunRequest, RunStatus


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


def _status_of(job: JobRecord) -> RunStatus:
    solutions = None
    evaluations = None
    if job.results is not None:
        solutions = sum(len(r.document["solutions"]) for r in job.results)
        evaluations = sum(r.document["metadata"]["evaluations"] for r in job.results)
    return RunStatus(
        id=job.id,
        status=job.status,
        feasible=job.feasible,
        utilities=[u.id for u in job.system.utilities],
        solutions=solutions,
        evaluations=evaluations,
        wall_time_s=job.wall_time_s,
        error=job.error,
    )


def _run_config_from_request(req: RunRequest) -> RunConfig:
    from ..orchestrate import (
        constraints_from_dict,
        ga_from_dict,
        weights_from_dict,
    )

    config = RunConfig(
        topology_path=None,
        synth=SynthSpec(**req.synth.model_dump()) if req.synth else None,
        ga=ga_from_dict(req.ga.model_dump()),
        objectives=tuple(req.objectives),
        constraints=constraints_from_dict(req.constraints.model_dump()),
        weights=weights_from_dict(req.weights.model_dump()),
        parallelism=req.parallelism,
    )
    config.validate_params()
    return config


def create_app(
    topology_path: Optional[str] = None,
    topology_doc: Optional[dict] = None,
    parallelism: int = 1,
    ui_dir: Optional[str] = None,
    job_workers: int = 2,
) -> FastAPI:
    app = FastAPI(title="zoneopt", version="0.1.0")
    store = JobStore(max_workers=job_workers)

    if topology_path is not None:
        system = load_topology(topology_path)
        doc = system_to_document(system)
    elif topology_doc is not None:
        system = load_topology(topology_doc)
        doc = system_to_document(system)
    else:
        system = None
        doc = None
    app.state.system = system
    app.state.topology_doc = doc
    app.state.store = store
    app.state.parallelism = parallelism

    @app.exception_handler(ApiError)
    async def api_error_handler(request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    @app.exception_handler(ValueError)
    async def value_error_handler(request: Request, exc: ValueError):
        return JSONResponse(
            status_code=400, content={"code": "validation", "message": str(exc)}
        )

    def _get_job(run_id: str) -> JobRecord:
        job = store.get(run_id)
        if job is None:
            raise ApiError(404, "unknown_run", f"run {run_id!r} does not exist")
        return job

    def _completed_job(run_id: str) -> JobRecord:
        job = _get_job(run_id)
        if job.status == "failed":
            raise ApiError(409, "run_failed", job.error or "run failed")
        if job.status != "completed":
            raise ApiError(409, "not_ready", f"run {run_id!r} is {job.status}")
        return job

    def _utility_result(job: JobRecord, utility: Optional[str]):
        results = job.results or []
        if utility is None:
            return results[0]
        for r in results:
            if r.utility_id == utility:
                return r
        raise ApiError(404, "unknown_utility", f"run has no utility {utility!r}")

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse()

    @app.get("/topology")
    def topology():
        if app.state.topology_doc is None:
            raise ApiError(404, "no_topology", "the server was started without a topology")
        return app.state.topology_doc

    @app.post("/runs", response_model=RunCreated, status_code=202)
    def create_run(req: RunRequest):
        try:
            if req.topology is not None and req.synth is not None:
                raise ApiError(
                    400, "validation",
                    "request must carry at most one of topology or synth",
                )
            config = _run_config_from_request(req)
            if req.topology is not None:
                run_system = load_topology(req.topology)
            elif req.synth is not None:
                run_system = synthesize_system(config.synth)
            elif app.state.system is not None:
                run_system = app.state.system
            else:
                raise ApiError(
                    400, "no_topology",
                    "request carries no topology/synth and the server has none loaded",
                )
            if config.parallelism == 1 and app.state.parallelism > 1:
                config.parallelism = app.state.parallelism
        except (TopologyError, GridError, ConfigError) as exc:
            raise ApiError(400, "validation", str(exc)) from exc
        run_id = store.submit(run_system, config)
        return RunCreated(id=run_id)

    @app.get("/runs", response_model=list[RunStatus])
    def list_runs():
        return [_status_of(j) for j in store.list()]

    @app.get("/runs/{run_id}", response_model=RunStatus)
    def run_status(run_id: str):
        job = _get_job(run_id)
        status = _status_of(job)
        if job.status == "completed":
            _refresh_latest_report(job)
        return status

    def _refresh_latest_report(job: JobRecord):
        if store.latest_report is not None and store.latest_report.get("run_id") == job.id:
            return
        summaries = [
            result_to_summary(r.document, wall_time_s=r.wall_time_s) for r in job.results
        ]
        baselines = None
        try:
            fronts = {r.utility_id: result_rows(r.document) for r in job.results}
            baselines = compare_baselines(job.system, fronts).as_dict()
        except ValueError:
            baselines = None
        store.latest_report = {
            "run_id": job.id,
            "report": report_json_doc(summaries),
            "baselines": baselines,
        }

    @app.get("/runs/{run_id}/front")
    def run_front(run_id: str):
        job = _completed_job(run_id)
        return [r.document for r in job.results]

    @app.get("/runs/{run_id}/solutions/{k}/clustering")
    def solution_clustering(run_id: str, k: int, utility: Optional[str] = None):
        job = _completed_job(run_id)
        result = _utility_result(job, utility)
        solutions = result.document["solutions"]
        if not 0 <= k < len(solutions):
            raise ApiError(
                404, "unknown_solution",
                f"solution {k} out of range (front has {len(solutions)} solutions)",
            )
        sol = solutions[k]
        return {
            "utility": result.utility_id,
            "solution_index": k,
            "bits": sol["bits"],
            "n_sg": sol["n_sg"],
            "objectives": sol["objectives"],
            "clusters": sol["clusters"],
        }

    @app.post("/runs/{run_id}/solutions/{k}/emit")
    def solution_emit(run_id: str, k: int, utility: Optional[str] = None):
        job = _completed_job(run_id)
        result = _utility_result(job, utility)
        solutions = result.document["solutions"]
        if not 0 <= k < len(solutions):
            raise ApiError(
                404, "unknown_solution",
                f"solution {k} out of range (front has {len(solutions)} solutions)",
            )
        outcome = emit_solution(result.document, str(k))
        return {
            "utility": outcome.utility_id,
            "solution_index": outcome.solution_index,
            "bits": outcome.bits,
            "files": outcome.files,
            "manifest": outcome.manifest,
            "audit": outcome.audit,
        }

    @app.get("/reports/latest")
    def latest_report():
        for job in reversed(store.list()):
            if job.status == "completed":
                _refresh_latest_report(job)
                break
        if store.latest_report is None:
            raise ApiError(404, "no_reports", "no completed runs yet")
        return store.latest_report

    ui_path = Path(ui_dir) if ui_dir else Path(__file__).resolve().parents[3] / "frontend" / "dist"
    if ui_path.is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_path), html=True), name="ui")

    return app
