/** Client-side session state and operator actions.
 *
 * All mission truth lives in service snapshots; the store only tracks which
 * job the operator is looking at, in-flight mutations and transient notices.
 * Operator actions go straight to the API and the store re-renders from the
 * confirmed response, so the UI can never drift from the log.
 */
import { ApiClient, ApiError, DispatchJson, JobJson, SnapshotJson } from "./api.js";

export interface Notice {
  level: "info" | "error" | "stale";
  text: string;
}

export interface AppState {
  snapshot: SnapshotJson | null;
  job: JobJson | null;
  notice: Notice | null;
  dispatch: DispatchJson | null;
  busy: boolean;
  /** set when a plan request needs explicit supersede confirmation */
  pendingSupersede: string | null;
}

export type OperatorAction =
  | { kind: "approve_cluster"; clusterId: string; secureDuration?: string }
  | { kind: "dismiss_cluster"; clusterId: string }
  | { kind: "request_plan"; variant?: string; supersede?: boolean }
  | { kind: "reallocate"; actionId: number; vehicle: string }
  | { kind: "approve_plan" };

export function initialState(): AppState {
  return {
    snapshot: null,
    job: null,
    notice: null,
    dispatch: null,
    busy: false,
    pendingSupersede: null,
  };
}

/** True when the displayed plan's snapshot is older than the mission. */
export function planIsStale(state: AppState): boolean {
  if (!state.snapshot || !state.job) return false;
  return state.job.revision < state.snapshot.revision;
}

function runningJobId(snapshot: SnapshotJson | null): string | null {
  if (!snapshot) return null;
  for (const [id, job] of Object.entries(snapshot.jobs)) {
    if (job.status === "running") return id;
  }
  return null;
}

export class Store {
  state: AppState = initialState();
  private listeners: ((state: AppState) => void)[] = [];

  constructor(private readonly api: ApiClient) {}

  subscribe(listener: (state: AppState) => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  private patch(partial: Partial<AppState>): void {
    this.state = { ...this.state, ...partial };
    this.emit();
  }

  async refresh(): Promise<void> {
    const snapshot = await this.api.getMission();
    this.patch({ snapshot });
    if (planIsStale(this.state)) {
      this.patch({ notice: { level: "stale", text: "Mission changed; the shown plan is stale. Request a new plan." } });
    }
  }

  async refreshJob(jobId: string): Promise<void> {
    const job = await this.api.getPlan(jobId);
    this.patch({ job });
  }

  /** Routes one operator action to the API and folds the result back in. */
  async submit(action: OperatorAction): Promise<void> {
    if (this.state.busy) return;
    this.patch({ busy: true, notice: null });
    try {
      switch (action.kind) {
        case "approve_cluster": {
          const snapshot = await this.api.approveCluster(action.clusterId, action.secureDuration);
          this.patch({ snapshot, notice: { level: "info", text: `Cluster ${action.clusterId} approved as obstacle.` } });
          break;
        }
        case "dismiss_cluster": {
          const snapshot = await this.api.dismissCluster(action.clusterId);
          this.patch({ snapshot, notice: { level: "info", text: `Cluster ${action.clusterId} dismissed.` } });
          break;
        }
        case "request_plan": {
          const running = runningJobId(this.state.snapshot);
          if (running && !action.supersede) {
            this.patch({
              pendingSupersede: running,
              notice: { level: "info", text: `Job ${running} is still running; confirm to supersede it.` },
            });
            break;
          }
          const job = await this.api.requestPlan(action.variant, Boolean(action.supersede));
          this.patch({ job, dispatch: null, pendingSupersede: null, notice: { level: "info", text: `Planning job ${job.id} started.` } });
          break;
        }
        case "reallocate": {
          if (!this.state.job) throw new ApiError(0, "no plan selected");
          const job = await this.api.reallocate(this.state.job.id, action.actionId, action.vehicle);
          this.patch({ job, notice: { level: "info", text: `Action ${action.actionId} moved to ${action.vehicle}.` } });
          break;
        }
        case "approve_plan": {
          if (!this.state.job) throw new ApiError(0, "no plan selected");
          const dispatch = await this.api.approvePlan(this.state.job.id);
          const robots = Object.entries(dispatch.commands)
            .map(([vehicle, commands]) => `${vehicle}: ${commands.length}`)
            .join(", ");
          this.patch({ dispatch, notice: { level: "info", text: `Plan dispatched (${robots}).` } });
          break;
        }
      }
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // stale revision: force a refresh so the operator sees the new truth
        this.patch({ notice: { level: "stale", text: err.message } });
        await this.refresh();
      } else if (err instanceof ApiError) {
        // rejection messages from the plan pipeline are shown verbatim
        this.patch({ notice: { level: "error", text: err.message } });
      } else {
        this.patch({ notice: { level: "error", text: `Request failed: ${String(err)}. Retry.` } });
      }
    } finally {
      this.patch({ busy: false });
    }
  }
}
