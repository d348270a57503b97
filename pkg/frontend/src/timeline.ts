/** Plan timeline rendering.
 *
 * One horizontal lane per vehicle, blocks positioned on an absolute time
 * axis. Like the map view this produces plain HTML strings for testability.
 */
import { JobJson, SimplifiedJson } from "./api.js";

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

/** "7/2" and "15" both come back as numbers for layout math. */
export function asNumber(value: string): number {
  const slash = value.indexOf("/");
  if (slash < 0) return Number(value);
  return Number(value.slice(0, slash)) / Number(value.slice(slash + 1));
}

function block(makespan: number, verb: string, vehicle: string, label: string, start: string, end: string): string {
  const s = asNumber(start);
  const e = asNumber(end);
  const left = makespan > 0 ? (100 * s) / makespan : 0;
  const width = makespan > 0 ? Math.max((100 * (e - s)) / makespan, 0.5) : 100;
  return (
    `<div class="block verb-${esc(verb)}" data-vehicle="${esc(vehicle)}" ` +
    `style="left:${left.toFixed(2)}%;width:${width.toFixed(2)}%" ` +
    `title="${esc(label)} [${esc(start)}, ${esc(end)}]">${esc(label)}</div>`
  );
}

/** Renders lanes for a simplified plan. */
export function renderTimeline(simplified: SimplifiedJson): string {
  const makespan = asNumber(simplified.makespan);
  const lanes = simplified.lanes.map((lane) => {
    const blocks = lane.actions
      .map((a) => block(makespan, a.verb, a.vehicle, a.label, a.start, a.end))
      .join("");
    return `<div class="lane" data-lane="${esc(lane.vehicle)}"><span class="lane-name">${esc(lane.vehicle)}</span><div class="track">${blocks}</div></div>`;
  });
  return [`<div class="timeline" data-makespan="${esc(simplified.makespan)}">`, ...lanes, "</div>"].join("\n");
}

/** Timeline area for a job in any state: spinner, incumbents or final plan. */
export function renderJob(job: JobJson | null): string {
  if (!job) return `<div class="timeline-empty">No plan requested yet.</div>`;
  if (job.status === "running") {
    const latest = job.incumbents[job.incumbents.length - 1];
    const head = `<div class="spinner" data-job="${esc(job.id)}">Planning job ${esc(job.id)} is running…</div>`;
    return latest ? head + "\n" + renderTimeline(latest.simplified) : head;
  }
  if (job.status === "failed" || job.status === "cancelled") {
    return `<div class="timeline-error">Job ${esc(job.id)} ${esc(job.status)}: ${esc(job.error ?? "")}</div>`;
  }
  if (!job.plan) return `<div class="timeline-empty">Job ${esc(job.id)} produced no plan.</div>`;
  return renderTimeline(job.plan.simplified);
}
