"""Mission control: event-sourced state, clustering, planning jobs.

All mutations funnel through one lock and append to the event store before
they apply, so a restart replays the log into the exact pre-crash state.
Planning runs on worker threads against immutable mission snapshots;
detections and cluster approvals never trigger planning on their own.
"""
from __future__ import annotations

import queue
import threading
from dataclasses import dataclass, field
from fractions import Fraction

from ..domain import (
    MissionState,
    ModelVariant,
    compile,
    mission_from_json,
    mission_to_json,
    obstacle_at,
)
from ..pipeline import reallocate, simplified_to_json, simplify
from ..solver import Plan, SolveConfig, plan_from_json, plan_to_json, solve
from ..validator import validate_plan
from .store import EventStore


class ServiceError(Exception):
    """Rejected operation; maps to a 4xx response."""


class StalePlanError(ServiceError):
    """The mission changed since the plan's snapshot."""


@dataclass
class Cluster:
    id: str
    members: list[dict] = field(default_factory=list)
    status: str = "pending"  # pending | approved | dismissed

    @property
    def centroid(self) -> tuple[float, float]:
        n = len(self.members)
        return (sum(m["x"] for m in self.members) / n,
                sum(m["y"] for m in self.members) / n)

    def to_json(self) -> dict:
        cx, cy = self.centroid
        return {"id": self.id, "status": self.status,
                "centroid": {"x": cx, "y": cy},
                "members": list(self.members)}


@dataclass
class JobRecord:
    id: str
    variant: str
    revision: int
    mission: dict  # mission snapshot, serialized
    status: str = "running"  # running | done | cancelled | failed
    plan: dict | None = None
    incumbents: list[dict] = field(default_factory=list)
    error: str | None = None

    def to_json(self) -> dict:
        return {"id": self.id, "variant": self.variant,
                "revision": self.revision, "status": self.status,
                "plan": self.plan, "incumbents": list(self.incumbents),
                "error": self.error}


class MissionControl:
    def __init__(self, mission: MissionState, store: EventStore | None = None,
                 cluster_threshold: float | None = None,
                 solve_budget: float = 120.0):
        self.lock = threading.RLock()
        self.base_mission = mission
        self.mission = mission
        self.store = store
        self.solve_budget = solve_budget
        self.threshold = (mission.cluster_threshold
                          if cluster_threshold is None else cluster_threshold)
        self.revision = 0
        self.clusters: dict[str, Cluster] = {}
        self.jobs: dict[str, JobRecord] = {}
        self.dispatches: list[dict] = []
        self._counters = {"cluster": 0, "job": 0, "detection": 0}
        self._cancels: dict[str, threading.Event] = {}
        self._threads: dict[str, threading.Thread] = {}
        self._subscribers: list[queue.Queue] = []
        if store is not None:
            self._recover()

    # -- persistence ---------------------------------------------------------

    def _state_json(self) -> dict:
        return {
            "mission": mission_to_json(self.mission),
            "revision": self.revision,
            "clusters": [c.to_json() for c in self.clusters.values()],
            "jobs": [j.to_json() | {"mission": j.mission}
                     for j in self.jobs.values()],
            "dispatches": list(self.dispatches),
            "counters": dict(self._counters),
        }

    def _load_state(self, state: dict) -> None:
        self.mission = mission_from_json(state["mission"])
        self.revision = state["revision"]
        self.clusters = {
            c["id"]: Cluster(c["id"], list(c["members"]), c["status"])
            for c in state["clusters"]}
        self.jobs = {}
        for j in state["jobs"]:
            self.jobs[j["id"]] = JobRecord(
                id=j["id"], variant=j["variant"], revision=j["revision"],
                mission=j["mission"], status=j["status"], plan=j["plan"],
                incumbents=list(j["incumbents"]), error=j["error"])
        self.dispatches = list(state["dispatches"])
        self._counters = dict(state["counters"])

    def _recover(self) -> None:
        loaded = self.store.load_snapshot()
        after = 0
        if loaded is not None:
            after, state = loaded
            self._load_state(state)
        for _seq, kind, data in self.store.tail(after):
            self._apply_event(kind, data)
        # a job that was running when the process died cannot resume
        for job in self.jobs.values():
            if job.status == "running":
                job.status = "failed"
                job.error = "interrupted by restart"

    def _commit(self, kind: str, data: dict) -> None:
        if self.store is not None:
            self.store.append(kind, data)
        self._apply_event(kind, data)
        if self.store is not None:
            self.store.maybe_compact(self._state_json())
        self._broadcast(kind, data)

    # -- event application (shared by live path and replay) -------------------

    def _apply_event(self, kind: str, data: dict) -> None:
        handler = getattr(self, f"_on_{kind}")
        handler(data)

    def _on_detection(self, data: dict) -> None:
        point = {k: data[k] for k in ("id", "x", "y", "robot", "note", "ts")}
        near = [c for c in self.clusters.values() if c.status == "pending"
                and any(self._dist(point, m) <= self.threshold
                        for m in c.members)]
        if not near:
            self._counters["cluster"] += 1
            cid = f"c{self._counters['cluster']}"
            self.clusters[cid] = Cluster(cid, [point])
            return
        near.sort(key=lambda c: c.id)
        target = near[0]
        target.members.append(point)
        for other in near[1:]:  # single linkage: the new point bridges them
            target.members.extend(other.members)
            del self.clusters[other.id]

    def _on_cluster_approved(self, data: dict) -> None:
        cluster = self.clusters[data["cluster_id"]]
        cluster.status = "approved"
        obstacle = obstacle_at(self.mission.graph, data["obstacle_id"],
                               data["location"], data["obstacle_type"],
                               Fraction(data["secure_duration"]))
        self.mission = MissionState(
            graph=self.mission.graph, vehicles=self.mission.vehicles,
            obstacles=(*self.mission.obstacles, obstacle),
            objective_location=self.mission.objective_location,
            objective_vehicle=self.mission.objective_vehicle,
            variant=self.mission.variant,
            cluster_threshold=self.mission.cluster_threshold)
        self.revision += 1

    def _on_cluster_dismissed(self, data: dict) -> None:
        self.clusters[data["cluster_id"]].status = "dismissed"

    def _on_plan_requested(self, data: dict) -> None:
        self.jobs[data["job_id"]] = JobRecord(
            id=data["job_id"], variant=data["variant"],
            revision=data["revision"], mission=data["mission"])

    def _on_plan_cancelled(self, data: dict) -> None:
        job = self.jobs[data["job_id"]]
        if job.status == "running":
            job.status = "cancelled"

    def _on_plan_incumbent(self, data: dict) -> None:
        job = self.jobs[data["job_id"]]
        job.incumbents.append(data["plan"])

    def _on_plan_finished(self, data: dict) -> None:
        job = self.jobs[data["job_id"]]
        if job.status != "running":
            return  # a cancellation won the race
        job.status = data["status"]
        job.plan = data["plan"]
        job.error = data["error"]

    def _on_plan_edited(self, data: dict) -> None:
        job = self.jobs[data["job_id"]]
        job.plan = data["plan"]

    def _on_plan_approved(self, data: dict) -> None:
        self.dispatches.append(data["dispatch"])

    # -- queries ---------------------------------------------------------------

    def snapshot(self) -> dict:
        with self.lock:
            return {
                "mission": mission_to_json(self.mission),
                "revision": self.revision,
                "clusters": [c.to_json() for c in self.clusters.values()],
                "jobs": {j.id: {"status": j.status, "variant": j.variant,
                                "revision": j.revision}
                         for j in self.jobs.values()},
                "dispatches": len(self.dispatches),
            }

    def cluster_list(self) -> list[dict]:
        with self.lock:
            return [c.to_json() for c in self.clusters.values()]

    def job_json(self, job_id: str) -> dict:
        with self.lock:
            job = self.jobs.get(job_id)
            if job is None:
                raise ServiceError(f"no job {job_id!r}")
            return job.to_json()

    # -- operations -------------------------------------------------------------

    @staticmethod
    def _dist(a: dict, b: dict) -> float:
        return ((a["x"] - b["x"]) ** 2 + (a["y"] - b["y"]) ** 2) ** 0.5

    def ingest_detection(self, x: float, y: float, robot: str = "",
                         note: str = "", ts: str = "") -> list[dict]:
        with self.lock:
            x0, y0, x1, y1 = self.mission.bounds()
            if not (x0 <= x <= x1 and y0 <= y <= y1):
                raise ServiceError(f"position ({x}, {y}) outside map bounds")
            self._counters["detection"] += 1
            data = {"id": f"d{self._counters['detection']}", "x": x, "y": y,
                    "robot": robot, "note": note, "ts": ts}
            self._commit("detection", data)
            return self.cluster_list()

    def approve_cluster(self, cluster_id: str, obstacle_type: str = "Obs1",
                        location: str | None = None,
                        secure_duration: Fraction | None = None) -> dict:
        with self.lock:
            cluster = self.clusters.get(cluster_id)
            if cluster is None:
                raise ServiceError(f"no cluster {cluster_id!r}")
            if cluster.status != "pending":
                raise ServiceError(f"cluster {cluster_id} already resolved "
                                   f"({cluster.status})")
            if location is None:
                cx, cy = cluster.centroid
                location = self.mission.nearest_location(cx, cy)
            if location not in self.mission.graph.locations:
                raise ServiceError(f"unknown location {location!r}")
            if secure_duration is None:
                secure_duration = Fraction(900)
            obstacle_id = f"OB_{location}_{cluster_id}"
            self._commit("cluster_approved", {
                "cluster_id": cluster_id, "obstacle_id": obstacle_id,
                "obstacle_type": obstacle_type, "location": location,
                "secure_duration": str(secure_duration)})
            return self.snapshot()

    def dismiss_cluster(self, cluster_id: str) -> dict:
        with self.lock:
            cluster = self.clusters.get(cluster_id)
            if cluster is None:
                raise ServiceError(f"no cluster {cluster_id!r}")
            if cluster.status != "pending":
                raise ServiceError(f"cluster {cluster_id} already resolved "
                                   f"({cluster.status})")
            self._commit("cluster_dismissed", {"cluster_id": cluster_id})
            return self.snapshot()

    def request_plan(self, variant: str | None = None,
                     supersede: bool = False) -> dict:
        with self.lock:
            running = [j for j in self.jobs.values() if j.status == "running"]
            if running and not supersede:
                raise ServiceError(f"job {running[0].id} already running; "
                                   "pass supersede to replace it")
            for job in running:
                self.cancel_job(job.id)
            label = variant or self.mission.variant.label
            self._counters["job"] += 1
            job_id = f"j{self._counters['job']}"
            mission = self.mission
            self._commit("plan_requested", {
                "job_id": job_id, "variant": label,
                "revision": self.revision,
                "mission": mission_to_json(mission)})
            cancel = threading.Event()
            self._cancels[job_id] = cancel
            thread = threading.Thread(
                target=self._run_job, args=(job_id, mission, label, cancel),
                daemon=True)
            self._threads[job_id] = thread
            thread.start()
            return self.job_json(job_id)

    def cancel_job(self, job_id: str) -> None:
        with self.lock:
            cancel = self._cancels.get(job_id)
            if cancel is not None:
                cancel.set()
            self._commit("plan_cancelled", {"job_id": job_id})

    def _run_job(self, job_id: str, mission: MissionState, label: str,
                 cancel: threading.Event) -> None:
        def publish(plan: Plan) -> None:
            with self.lock:
                if self.jobs[job_id].status != "running":
                    return
                self._commit("plan_incumbent", {
                    "job_id": job_id, "plan": self._plan_payload(plan)})

        try:
            problem = compile(mission, ModelVariant.from_label(label))
            cfg = SolveConfig(time_budget=self.solve_budget, cancel=cancel,
                              on_incumbent=publish)
            final = solve(problem, cfg)
            status = "done" if final.found else "failed"
            payload = self._plan_payload(final) if final.found else None
            error = None if final.found else final.status
            with self.lock:
                if self.jobs[job_id].status != "running":
                    return
                self._commit("plan_finished", {
                    "job_id": job_id, "status": status,
                    "plan": payload, "error": error})
        except Exception as exc:  # noqa: BLE001 - fail the job, not the service
            with self.lock:
                if self.jobs[job_id].status == "running":
                    self._commit("plan_finished", {
                        "job_id": job_id, "status": "failed",
                        "plan": None, "error": str(exc)})

    @staticmethod
    def _plan_payload(plan: Plan) -> dict:
        payload = plan_to_json(plan)
        payload["simplified"] = simplified_to_json(simplify(plan))
        return payload

    def reallocate_plan(self, job_id: str, action_id: int,
                        vehicle: str) -> dict:
        with self.lock:
            job = self.jobs.get(job_id)
            if job is None:
                raise ServiceError(f"no job {job_id!r}")
            payload = job.plan or (job.incumbents[-1] if job.incumbents else None)
            if payload is None:
                raise ServiceError(f"job {job_id} has no plan to edit")
            mission = mission_from_json(job.mission)
            problem = compile(mission, ModelVariant.from_label(job.variant))
            plan = plan_from_json(payload)
            new_plan, reason = reallocate(problem, plan, action_id, vehicle)
            if new_plan is None:
                raise ServiceError(reason)
            self._commit("plan_edited", {
                "job_id": job_id, "action_id": action_id, "vehicle": vehicle,
                "plan": self._plan_payload(new_plan)})
            return self.job_json(job_id)

    def approve_plan(self, job_id: str) -> dict:
        with self.lock:
            job = self.jobs.get(job_id)
            if job is None:
                raise ServiceError(f"no job {job_id!r}")
            payload = job.plan or (job.incumbents[-1] if job.incumbents else None)
            if payload is None:
                raise ServiceError(f"job {job_id} has no plan to approve")
            if job.revision != self.revision:
                raise StalePlanError(
                    f"mission revision {self.revision} is newer than the "
                    f"plan snapshot ({job.revision}); request a new plan")
            mission = mission_from_json(job.mission)
            problem = compile(mission, ModelVariant.from_label(job.variant))
            plan = plan_from_json(payload)
            violations = validate_plan(problem, plan)
            if violations:
                raise ServiceError("plan failed validation: "
                                   + "; ".join(violations))
            commands: dict[str, list[dict]] = {}
            for lane in payload["simplified"]["lanes"]:
                commands[lane["vehicle"]] = lane["actions"]
            dispatch = {"job_id": job_id, "revision": job.revision,
                        "makespan": payload["makespan"],
                        "commands": commands}
            self._commit("plan_approved", {"dispatch": dispatch})
            return dispatch

    # -- push channel -----------------------------------------------------------

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self.lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self.lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def _broadcast(self, kind: str, data: dict) -> None:
        for q in list(self._subscribers):
            q.put({"kind": kind, "data": data, "revision": self.revision})

    def wait_for_job(self, job_id: str, timeout: float = 300.0) -> dict:
        thread = self._threads.get(job_id)
        if thread is not None:
            thread.join(timeout)
        return self.job_json(job_id)
