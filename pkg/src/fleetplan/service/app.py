"""HTTP front of the mission service.

Environment:
  FLEETPLAN_ADDR               bind address, host:port (serve command)
  FLEETPLAN_DATA_DIR           event log directory; unset disables persistence
  FLEETPLAN_CLUSTER_THRESHOLD  overrides the mission's clustering threshold
"""
from __future__ import annotations

import json
import os
import queue
from fractions import Fraction

from fastapi import FastAPI, HTTPException
from fastapi.responses import StreamingResponse

from ..benchmark import run_benchmark
from ..domain import MissionState
from .core import MissionControl, ServiceError, StalePlanError
from .schemas import ClusterApproveIn, DetectionIn, PlanRequestIn, ReallocateIn
from .store import EventStore


def build_control(mission: MissionState,
                  data_dir: str | None = None,
                  cluster_threshold: float | None = None,
                  solve_budget: float = 120.0) -> MissionControl:
    if data_dir is None:
        data_dir = os.environ.get("FLEETPLAN_DATA_DIR")
    if cluster_threshold is None:
        raw = os.environ.get("FLEETPLAN_CLUSTER_THRESHOLD")
        cluster_threshold = float(raw) if raw else None
    store = EventStore(data_dir) if data_dir else None
    return MissionControl(mission, store=store,
                          cluster_threshold=cluster_threshold,
                          solve_budget=solve_budget)


def create_app(control: MissionControl) -> FastAPI:
    app = FastAPI(title="fleetplan mission service")
    app.state.control = control

    def guard(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except StalePlanError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except ServiceError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.get("/mission")
    def mission():
        return control.snapshot()

    @app.post("/events/detection")
    def detection(body: DetectionIn):
        return guard(control.ingest_detection, body.x, body.y,
                     body.robot, body.note, body.ts)

    @app.get("/clusters")
    def clusters():
        return control.cluster_list()

    @app.post("/clusters/{cluster_id}/approve")
    def approve_cluster(cluster_id: str, body: ClusterApproveIn | None = None):
        body = body or ClusterApproveIn()
        dur = Fraction(body.secure_duration) if body.secure_duration else None
        return guard(control.approve_cluster, cluster_id,
                     body.obstacle_type, body.location, dur)

    @app.post("/clusters/{cluster_id}/dismiss")
    def dismiss_cluster(cluster_id: str):
        return guard(control.dismiss_cluster, cluster_id)

    @app.post("/plans")
    def request_plan(body: PlanRequestIn | None = None):
        body = body or PlanRequestIn()
        return guard(control.request_plan, body.variant, body.supersede)

    @app.get("/plans/{job_id}")
    def get_plan(job_id: str):
        return guard(control.job_json, job_id)

    @app.post("/plans/{job_id}/reallocate")
    def reallocate(job_id: str, body: ReallocateIn):
        return guard(control.reallocate_plan, job_id, body.action_id,
                     body.vehicle)

    @app.post("/plans/{job_id}/approve")
    def approve_plan(job_id: str):
        return guard(control.approve_plan, job_id)

    @app.get("/benchmark")
    def benchmark(steps: str = "1,2,3", repetitions: int = 3,
                  time_budget: float = 120.0):
        step_list = tuple(int(s) for s in steps.split(",") if s)
        report = run_benchmark(steps=step_list, repetitions=repetitions,
                               time_budget=time_budget)
        return {"repetitions": report.repetitions, "rows": report.rows()}

    @app.get("/events")
    def events():
        q = control.subscribe()

        def stream():
            try:
                while True:
                    try:
                        item = q.get(timeout=30.0)
                    except queue.Empty:
                        yield ": keep-alive\n\n"
                        continue
                    yield f"data: {json.dumps(item)}\n\n"
            finally:
                control.unsubscribe(q)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app


def serve(mission: MissionState, addr: str | None = None,
          data_dir: str | None = None,
          cluster_threshold: float | None = None) -> None:
    import uvicorn

    addr = addr or os.environ.get("FLEETPLAN_ADDR", "127.0.0.1:8000")
    host, _, port = addr.rpartition(":")
    control = build_control(mission, data_dir, cluster_threshold)
    app = create_app(control)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
