/** Typed client for the mission service HTTP API.
 *
 * The fetch function is injectable so the client can be exercised without a
 * network; every method resolves to parsed JSON or throws ApiError carrying
 * the server's detail message and status code.
 */

export interface LocationJson {
  name: string;
  x: number;
  y: number;
}

export interface EdgeJson {
  from: string;
  to: string;
  modes: Record<string, string>;
}

export interface VehicleJson {
  name: string;
  kind: string;
  location: string;
}

export interface ObstacleJson {
  id: string;
  type: string;
  location: string;
  edges: string[][];
  secure_duration: string;
}

export interface MissionJson {
  locations: LocationJson[];
  edges: EdgeJson[];
  vehicles: VehicleJson[];
  obstacles: ObstacleJson[];
  objective: { location: string; vehicle?: string };
  variant: string;
  cluster_threshold: number;
}

export interface ClusterJson {
  id: string;
  status: "pending" | "approved" | "dismissed";
  centroid: { x: number; y: number };
  members: { id: string; x: number; y: number; robot: string; note: string; ts: string }[];
}

export interface DisplayActionJson {
  verb: string;
  vehicle: string;
  targets: string[];
  start: string;
  end: string;
  label: string;
}

export interface SimplifiedJson {
  makespan: string;
  lanes: { vehicle: string; actions: DisplayActionJson[] }[];
}

export interface ActionJson {
  id: number;
  name: string;
  params: string[];
  vehicle: string | null;
  start: string;
  end: string;
  chain: string;
  path: string[];
  display: { verb: string | null; targets: string[]; is_move: boolean };
}

export interface PlanJson {
  status: string;
  makespan: string | null;
  optimal: boolean;
  variant: string | null;
  nodes: number;
  wall_time: number;
  actions: ActionJson[];
  simplified: SimplifiedJson;
}

export interface JobJson {
  id: string;
  variant: string;
  revision: number;
  status: "running" | "done" | "cancelled" | "failed";
  plan: PlanJson | null;
  incumbents: PlanJson[];
  error: string | null;
}

export interface SnapshotJson {
  mission: MissionJson;
  revision: number;
  clusters: ClusterJson[];
  jobs: Record<string, { status: string; variant: string; revision: number }>;
  dispatches: number;
}

export interface DispatchJson {
  job_id: string;
  revision: number;
  makespan: string;
  commands: Record<string, DisplayActionJson[]>;
}

export interface ServiceEvent {
  kind: string;
  data: Record<string, unknown>;
  revision: number;
}

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "content-type": "application/json" } };
    if (body !== undefined) init.body = JSON.stringify(body);
    const res = await this.fetchFn(this.base + path, init);
    const payload = await res.json().catch(() => ({}));
    if (!res.ok) {
      const detail = typeof payload?.detail === "string" ? payload.detail : res.statusText;
      throw new ApiError(res.status, detail);
    }
    return payload as T;
  }

  getMission(): Promise<SnapshotJson> {
    return this.request("GET", "/mission");
  }

  postDetection(x: number, y: number, robot = "", note = ""): Promise<ClusterJson[]> {
    return this.request("POST", "/events/detection", { x, y, robot, note });
  }

  getClusters(): Promise<ClusterJson[]> {
    return this.request("GET", "/clusters");
  }

  approveCluster(id: string, secureDuration?: string, location?: string): Promise<SnapshotJson> {
    const body: Record<string, unknown> = {};
    if (secureDuration !== undefined) body.secure_duration = secureDuration;
    if (location !== undefined) body.location = location;
    return this.request("POST", `/clusters/${id}/approve`, body);
  }

  dismissCluster(id: string): Promise<SnapshotJson> {
    return this.request("POST", `/clusters/${id}/dismiss`);
  }

  requestPlan(variant?: string, supersede = false): Promise<JobJson> {
    return this.request("POST", "/plans", { variant: variant ?? null, supersede });
  }

  getPlan(jobId: string): Promise<JobJson> {
    return this.request("GET", `/plans/${jobId}`);
  }

  reallocate(jobId: string, actionId: number, vehicle: string): Promise<JobJson> {
    return this.request("POST", `/plans/${jobId}/reallocate`, {
      action_id: actionId,
      vehicle,
    });
  }

  approvePlan(jobId: string): Promise<DispatchJson> {
    return this.request("POST", `/plans/${jobId}/approve`);
  }

  /** Server-sent events; the caller owns the EventSource lifecycle. */
  openEvents(onEvent: (event: ServiceEvent) => void): EventSource {
    const source = new EventSource(this.base + "/events");
    source.onmessage = (msg) => onEvent(JSON.parse(msg.data) as ServiceEvent);
    return source;
  }
}
