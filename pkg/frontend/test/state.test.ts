import { describe, expect, it } from "vitest";
import { ApiClient, FetchLike } from "../src/api.js";
import { planIsStale, Store } from "../src/state.js";

type Route = { status: number; body: unknown };

/** Minimal fetch fake keyed by "METHOD path"; records every call. */
function fakeFetch(routes: Record<string, Route>) {
  const calls: { key: string; body: unknown }[] = [];
  const fetchFn: FetchLike = async (url, init) => {
    const key = `${init?.method ?? "GET"} ${url}`;
    calls.push({ key, body: init?.body ? JSON.parse(init.body as string) : undefined });
    const route = routes[key];
    if (!route) throw new Error(`unexpected request ${key}`);
    return {
      ok: route.status < 400,
      status: route.status,
      statusText: String(route.status),
      json: async () => route.body,
    } as Response;
  };
  return { fetchFn, calls };
}

const emptySimplified = { makespan: "15", lanes: [] };
const donePlan = {
  status: "optimal",
  makespan: "15",
  optimal: true,
  variant: "optimized",
  nodes: 4,
  wall_time: 0.2,
  actions: [],
  simplified: emptySimplified,
};
const doneJob = {
  id: "job-1",
  variant: "optimized",
  revision: 0,
  status: "done",
  plan: donePlan,
  incumbents: [],
  error: null,
};

function snapshotBody(revision: number, jobs: Record<string, { status: string; variant: string; revision: number }> = {}) {
  return {
    mission: {
      locations: [],
      edges: [],
      vehicles: [],
      obstacles: [],
      objective: { location: "L8" },
      variant: "optimized",
      cluster_threshold: 25,
    },
    revision,
    clusters: [],
    jobs,
    dispatches: 0,
  };
}

describe("Store.submit", () => {
  it("approving a plan shows a per-robot dispatch summary", async () => {
    const { fetchFn } = fakeFetch({
      "POST /plans/job-1/approve": {
        status: 200,
        body: {
          job_id: "job-1",
          revision: 0,
          makespan: "15",
          commands: { H: [{}], UAV1: [{}], UGV1: [{}] },
        },
      },
    });
    const store = new Store(new ApiClient("", fetchFn));
    store.state = { ...store.state, job: doneJob as never };
    await store.submit({ kind: "approve_plan" });
    expect(store.state.dispatch?.makespan).toBe("15");
    expect(store.state.notice?.level).toBe("info");
    expect(store.state.notice?.text).toContain("H: 1, UAV1: 1, UGV1: 1");
  });

  it("shows reallocation rejections verbatim", async () => {
    const { fetchFn } = fakeFetch({
      "POST /plans/job-1/reallocate": { status: 422, body: { detail: "type-inadmissible: Humans cannot explore" } },
    });
    const store = new Store(new ApiClient("", fetchFn));
    store.state = { ...store.state, job: doneJob as never };
    await store.submit({ kind: "reallocate", actionId: 3, vehicle: "H" });
    expect(store.state.notice?.level).toBe("error");
    expect(store.state.notice?.text).toBe("type-inadmissible: Humans cannot explore");
    expect(store.state.job?.id).toBe("job-1");
  });

  it("asks for confirmation before superseding a running job", async () => {
    const routes = fakeFetch({
      "POST /plans": { status: 200, body: { ...doneJob, id: "job-2", status: "running", plan: null } },
    });
    const store = new Store(new ApiClient("", routes.fetchFn));
    store.state = {
      ...store.state,
      snapshot: snapshotBody(0, { "job-1": { status: "running", variant: "optimized", revision: 0 } }) as never,
    };

    await store.submit({ kind: "request_plan", variant: "optimized" });
    expect(routes.calls).toHaveLength(0);
    expect(store.state.pendingSupersede).toBe("job-1");
    expect(store.state.notice?.text).toContain("confirm to supersede");

    await store.submit({ kind: "request_plan", variant: "optimized", supersede: true });
    expect(routes.calls).toHaveLength(1);
    expect(routes.calls[0].body).toMatchObject({ supersede: true });
    expect(store.state.pendingSupersede).toBeNull();
    expect(store.state.job?.id).toBe("job-2");
  });

  it("turns a 409 into a stale banner and a forced refresh", async () => {
    const routes = fakeFetch({
      "POST /plans/job-1/approve": { status: 409, body: { detail: "mission changed; request a new plan" } },
      "GET /mission": { status: 200, body: snapshotBody(2) },
    });
    const store = new Store(new ApiClient("", routes.fetchFn));
    store.state = { ...store.state, job: doneJob as never, snapshot: snapshotBody(0) as never };
    await store.submit({ kind: "approve_plan" });
    expect(store.state.notice?.level).toBe("stale");
    expect(store.state.snapshot?.revision).toBe(2);
    expect(planIsStale(store.state)).toBe(true);
    expect(routes.calls.map((c) => c.key)).toEqual(["POST /plans/job-1/approve", "GET /mission"]);
  });

  it("flags stale plans after a plain refresh too", async () => {
    const routes = fakeFetch({ "GET /mission": { status: 200, body: snapshotBody(3) } });
    const store = new Store(new ApiClient("", routes.fetchFn));
    store.state = { ...store.state, job: doneJob as never };
    await store.refresh();
    expect(planIsStale(store.state)).toBe(true);
    expect(store.state.notice?.level).toBe("stale");
  });

  it("cluster approval swaps in the fresh snapshot", async () => {
    const routes = fakeFetch({ "POST /clusters/C1/approve": { status: 200, body: snapshotBody(1) } });
    const store = new Store(new ApiClient("", routes.fetchFn));
    await store.submit({ kind: "approve_cluster", clusterId: "C1", secureDuration: "120" });
    expect(routes.calls[0].body).toMatchObject({ secure_duration: "120" });
    expect(store.state.snapshot?.revision).toBe(1);
    expect(store.state.notice?.text).toContain("C1");
  });
});
