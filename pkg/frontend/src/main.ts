/** Browser entry point: wires the store, views and the event stream. */
import { ApiClient } from "./api.js";
import { renderMission } from "./graphView.js";
import { renderJob } from "./timeline.js";
import { AppState, planIsStale, Store } from "./state.js";

function noticeHtml(state: AppState): string {
  if (!state.notice) return "";
  const cls = state.notice.level;
  const extra =
    state.pendingSupersede !== null
      ? `<button id="confirm-supersede">Supersede job ${state.pendingSupersede}</button>`
      : "";
  return `<div class="notice notice-${cls}">${state.notice.text}${extra}</div>`;
}

function clustersHtml(state: AppState): string {
  if (!state.snapshot) return "";
  const rows = state.snapshot.clusters
    .filter((c) => c.status === "pending")
    .map(
      (c) =>
        `<li data-cluster="${c.id}">${c.id} (${c.members.length} detections)` +
        ` <button data-approve="${c.id}">Approve</button>` +
        ` <button data-dismiss="${c.id}">Dismiss</button></li>`,
    );
  return rows.length ? `<ul class="clusters">${rows.join("")}</ul>` : "";
}

function render(state: AppState): void {
  const app = document.getElementById("app");
  if (!app) return;
  const stale = planIsStale(state) ? `<div class="notice notice-stale">Plan is stale; request a new one.</div>` : "";
  app.innerHTML = [
    noticeHtml(state),
    stale,
    state.snapshot ? renderMission(state.snapshot) : "<p>Loading mission…</p>",
    clustersHtml(state),
    `<div class="controls">` +
      `<button id="plan-natural">Plan (natural)</button>` +
      `<button id="plan-optimized">Plan (optimized)</button>` +
      `<button id="approve-plan">Approve and dispatch</button></div>`,
    renderJob(state.job),
  ].join("\n");
}

function wire(store: Store): void {
  document.addEventListener("click", (ev) => {
    const el = ev.target as HTMLElement;
    if (el.id === "plan-natural") void store.submit({ kind: "request_plan", variant: "natural" });
    else if (el.id === "plan-optimized") void store.submit({ kind: "request_plan", variant: "optimized" });
    else if (el.id === "approve-plan") void store.submit({ kind: "approve_plan" });
    else if (el.id === "confirm-supersede") void store.submit({ kind: "request_plan", supersede: true });
    else if (el.dataset.approve) void store.submit({ kind: "approve_cluster", clusterId: el.dataset.approve });
    else if (el.dataset.dismiss) void store.submit({ kind: "dismiss_cluster", clusterId: el.dataset.dismiss });
  });
}

export function boot(): void {
  const api = new ApiClient("");
  const store = new Store(api);
  store.subscribe(render);
  wire(store);
  api.openEvents((event) => {
    void store.refresh();
    if (event.kind === "job_finished" && typeof event.data.job_id === "string") {
      void store.refreshJob(event.data.job_id);
    }
  });
  void store.refresh();
}

if (typeof document !== "undefined" && document.getElementById("app")) boot();
