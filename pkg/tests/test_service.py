import threading
import time
from fractions import Fraction

import pytest
from fastapi.testclient import TestClient

from fleetplan.domain import (
    HUMANS,
    UAV,
    UGV,
    MissionState,
    NavigationGraph,
    Vehicle,
)
from fleetplan.service import EventStore, MissionControl, ServiceError, StalePlanError
from fleetplan.service.app import create_app
from fleetplan.solver import Plan

F = Fraction


def tiny_mission(objective="L2", edges=True, threshold=5.0):
    modes = {HUMANS: F(10), UAV: F(5), UGV: F(5)}
    graph = NavigationGraph(
        {"L1": (0.0, 0.0), "L2": (40.0, 0.0), "L3": (40.0, 40.0)},
        {pair: dict(modes)
         for pair in (("L1", "L2"), ("L2", "L1"), ("L2", "L3"), ("L3", "L2"))}
        if edges else {})
    return MissionState(
        graph,
        (Vehicle("H", HUMANS, "L1"), Vehicle("UAV1", UAV, "L1"),
         Vehicle("UGV1", UGV, "L1")),
        (), objective_location=objective, cluster_threshold=threshold)


@pytest.fixture
def control():
    return MissionControl(tiny_mission(), solve_budget=60.0)


@pytest.fixture
def client(control):
    return TestClient(create_app(control))


class TestClustering:
    def test_first_detection_creates_cluster(self, control):
        clusters = control.ingest_detection(10.0, 0.0, robot="UAV1")
        assert len(clusters) == 1
        assert clusters[0]["centroid"] == {"x": 10.0, "y": 0.0}
        assert clusters[0]["status"] == "pending"

    def test_nearby_detections_join(self, control):
        control.ingest_detection(10.0, 0.0)
        clusters = control.ingest_detection(12.0, 0.0)
        assert len(clusters) == 1
        assert clusters[0]["centroid"] == {"x": 11.0, "y": 0.0}

    def test_distant_detections_split(self, control):
        control.ingest_detection(10.0, 0.0)
        clusters = control.ingest_detection(25.0, 0.0)  # 3x threshold away
        assert len(clusters) == 2

    def test_bridging_detection_merges(self, control):
        control.ingest_detection(10.0, 0.0)
        control.ingest_detection(18.0, 0.0)
        clusters = control.ingest_detection(14.0, 0.0)
        assert len(clusters) == 1
        assert len(clusters[0]["members"]) == 3

    def test_out_of_bounds_rejected(self, control):
        with pytest.raises(ServiceError):
            control.ingest_detection(1000.0, 1000.0)

    def test_detections_never_trigger_planning(self, control):
        control.ingest_detection(10.0, 0.0)
        control.ingest_detection(25.0, 0.0)
        assert control.snapshot()["jobs"] == {}


class TestClusterResolution:
    def test_approve_adds_obstacle_and_bumps_revision(self, control):
        control.ingest_detection(39.0, 1.0)
        cid = control.cluster_list()[0]["id"]
        snap = control.approve_cluster(cid, secure_duration=F(7))
        assert snap["revision"] == 1
        obstacles = snap["mission"]["obstacles"]
        assert len(obstacles) == 1
        assert obstacles[0]["location"] == "L2"  # nearest to the centroid
        assert obstacles[0]["id"] == f"OB_L2_{cid}"
        assert obstacles[0]["secure_duration"] == "7"

    def test_approve_twice_rejected(self, control):
        control.ingest_detection(10.0, 0.0)
        cid = control.cluster_list()[0]["id"]
        control.approve_cluster(cid)
        with pytest.raises(ServiceError, match="already resolved"):
            control.approve_cluster(cid)

    def test_dismiss_changes_only_status(self, control):
        control.ingest_detection(10.0, 0.0)
        cid = control.cluster_list()[0]["id"]
        before = control.snapshot()
        snap = control.dismiss_cluster(cid)
        assert snap["clusters"][0]["status"] == "dismissed"
        assert snap["revision"] == before["revision"]
        assert snap["mission"]["obstacles"] == before["mission"]["obstacles"]

    def test_dismissed_cluster_not_rejoined(self, control):
        control.ingest_detection(10.0, 0.0)
        cid = control.cluster_list()[0]["id"]
        control.dismiss_cluster(cid)
        clusters = control.ingest_detection(11.0, 0.0)
        assert len(clusters) == 2


class TestPlanningJobs:
    def test_job_lifecycle(self, control):
        job = control.request_plan()
        assert job["status"] == "running"
        done = control.wait_for_job(job["id"])
        assert done["status"] == "done"
        assert done["plan"]["status"] == "optimal"
        # both robots survey the edge in parallel, then the humans walk it
        assert done["plan"]["makespan"] == "15"
        assert "simplified" in done["plan"]

    def test_second_request_needs_supersede(self, control, monkeypatch):
        def slow_solve(problem, cfg):
            cfg.cancel.wait(10.0)
            return Plan(status="cancelled")

        monkeypatch.setattr("fleetplan.service.core.solve", slow_solve)
        first = control.request_plan()
        with pytest.raises(ServiceError, match="already running"):
            control.request_plan()
        second = control.request_plan(supersede=True)
        assert control.job_json(first["id"])["status"] == "cancelled"
        control.cancel_job(second["id"])

    def test_infeasible_mission_fails_job(self):
        control = MissionControl(tiny_mission(edges=False), solve_budget=10.0)
        job = control.request_plan()
        done = control.wait_for_job(job["id"])
        assert done["status"] == "failed"
        assert done["error"] == "infeasible"

    def test_approve_dispatches_commands(self, control):
        job = control.request_plan()
        control.wait_for_job(job["id"])
        dispatch = control.approve_plan(job["id"])
        assert dispatch["job_id"] == job["id"]
        assert dispatch["makespan"] == "15"
        assert set(dispatch["commands"]) == {"H", "UAV1", "UGV1"}
        assert control.snapshot()["dispatches"] == 1

    def test_stale_plan_rejected(self, control):
        job = control.request_plan()
        control.wait_for_job(job["id"])
        control.ingest_detection(10.0, 0.0)
        cid = control.cluster_list()[0]["id"]
        control.approve_cluster(cid)
        with pytest.raises(StalePlanError):
            control.approve_plan(job["id"])

    def test_reallocation_rejected_for_humans(self):
        mission = tiny_mission(objective="L3")
        control = MissionControl(mission, solve_budget=60.0)
        job = control.request_plan()
        done = control.wait_for_job(job["id"])
        explore = next(a for a in done["plan"]["actions"]
                       if a["name"].startswith("explore"))
        with pytest.raises(ServiceError, match="type-inadmissible"):
            control.reallocate_plan(job["id"], explore["id"], "H")

    def test_events_broadcast(self, control):
        q = control.subscribe()
        control.ingest_detection(10.0, 0.0)
        event = q.get(timeout=1.0)
        assert event["kind"] == "detection"
        assert event["data"]["x"] == 10.0
        control.unsubscribe(q)


class TestPersistence:
    def test_crash_restart_replays_state(self, tmp_path):
        store = EventStore(str(tmp_path))
        control = MissionControl(tiny_mission(), store=store, solve_budget=60.0)
        control.ingest_detection(10.0, 0.0)
        control.ingest_detection(39.0, 1.0)
        cid = sorted(control.clusters)[1]
        control.approve_cluster(cid)
        job = control.request_plan()
        control.wait_for_job(job["id"])
        expected = control.snapshot()

        revived = MissionControl(tiny_mission(), store=EventStore(str(tmp_path)),
                                 solve_budget=60.0)
        assert revived.snapshot() == expected

    def test_interrupted_job_fails_on_restart(self, tmp_path, monkeypatch):
        def hang(problem, cfg):
            cfg.cancel.wait(30.0)
            return Plan(status="cancelled")

        monkeypatch.setattr("fleetplan.service.core.solve", hang)
        store = EventStore(str(tmp_path))
        control = MissionControl(tiny_mission(), store=store, solve_budget=60.0)
        job = control.request_plan()
        # simulate a crash: reopen the log without finishing the job
        revived = MissionControl(tiny_mission(), store=EventStore(str(tmp_path)),
                                 solve_budget=60.0)
        record = revived.job_json(job["id"])
        assert record["status"] == "failed"
        assert record["error"] == "interrupted by restart"
        control.cancel_job(job["id"])

    def test_compaction_preserves_state(self, tmp_path):
        store = EventStore(str(tmp_path))
        control = MissionControl(tiny_mission(threshold=0.5), store=store)
        for i in range(60):  # crosses the snapshot interval
            control.ingest_detection(float(i % 30), 0.0)
        expected = control.snapshot()
        revived = MissionControl(tiny_mission(threshold=0.5),
                                 store=EventStore(str(tmp_path)))
        assert revived.snapshot() == expected
        assert (tmp_path / "snapshot.json").exists()


class TestHttpApi:
    def test_scripted_operator_sequence(self, client, control):
        # detect -> cluster -> approve -> request -> approve plan yields
        # exactly one job and one dispatch
        r = client.post("/events/detection", json={"x": 39.0, "y": 1.0})
        assert r.status_code == 200
        cid = r.json()[0]["id"]
        r = client.post(f"/clusters/{cid}/approve",
                        json={"secure_duration": "4"})
        assert r.status_code == 200
        r = client.post("/plans")
        assert r.status_code == 200
        job_id = r.json()["id"]
        control.wait_for_job(job_id)
        r = client.get(f"/plans/{job_id}")
        assert r.json()["status"] == "done"
        r = client.post(f"/plans/{job_id}/approve")
        assert r.status_code == 200
        snap = client.get("/mission").json()
        assert len(snap["jobs"]) == 1
        assert snap["dispatches"] == 1

    def test_stale_plan_maps_to_409(self, client, control):
        job_id = client.post("/plans").json()["id"]
        control.wait_for_job(job_id)
        cid = client.post("/events/detection",
                          json={"x": 10.0, "y": 0.0}).json()[0]["id"]
        client.post(f"/clusters/{cid}/approve")
        r = client.post(f"/plans/{job_id}/approve")
        assert r.status_code == 409
        assert "request a new plan" in r.json()["detail"]

    def test_service_errors_map_to_422(self, client):
        r = client.post("/events/detection", json={"x": 9999.0, "y": 0.0})
        assert r.status_code == 422
        r = client.post("/clusters/ghost/approve")
        assert r.status_code == 422
        r = client.get("/plans/ghost")
        assert r.status_code == 422

    def test_mission_snapshot_shape(self, client):
        snap = client.get("/mission").json()
        assert snap["revision"] == 0
        assert snap["mission"]["objective"]["location"] == "L2"
        assert snap["clusters"] == []

    def test_sse_stream_delivers_events(self, control):
        # the test client buffers responses, so the push channel needs a
        # real server
        import httpx
        import uvicorn

        config = uvicorn.Config(create_app(control), host="127.0.0.1",
                                port=0, log_level="error")
        server = uvicorn.Server(config)
        thread = threading.Thread(target=server.run, daemon=True)
        thread.start()
        try:
            for _ in range(100):
                if server.started:
                    break
                time.sleep(0.05)
            assert server.started
            port = server.servers[0].sockets[0].getsockname()[1]
            timer = threading.Timer(0.2, control.ingest_detection,
                                    args=(10.0, 0.0))
            timer.start()
            with httpx.stream("GET", f"http://127.0.0.1:{port}/events",
                              timeout=10.0) as stream:
                assert stream.headers["content-type"].startswith(
                    "text/event-stream")
                for line in stream.iter_lines():
                    if line.startswith("data: "):
                        assert '"kind": "detection"' in line
                        break
        finally:
            server.should_exit = True
            thread.join(timeout=5.0)
