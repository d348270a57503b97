/** Mission map rendering.
 *
 * Pure string-producing SVG builders so the view layer can be unit tested
 * without a DOM. Coordinates come straight from the mission; a viewBox wraps
 * them with a margin instead of rescaling, keeping distances truthful.
 */
import { ClusterJson, MissionJson, SnapshotJson } from "./api.js";

const MARGIN = 60;

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

function viewBox(mission: MissionJson): string {
  const xs = mission.locations.map((l) => l.x);
  const ys = mission.locations.map((l) => l.y);
  const minX = Math.min(...xs, 0) - MARGIN;
  const minY = Math.min(...ys, 0) - MARGIN;
  const w = Math.max(...xs, 0) - minX + MARGIN;
  const h = Math.max(...ys, 0) - minY + MARGIN;
  return `${minX} ${minY} ${w} ${h}`;
}

function edgeLines(mission: MissionJson): string[] {
  const at = new Map(mission.locations.map((l) => [l.name, l]));
  const lines: string[] = [];
  for (const edge of mission.edges) {
    const a = at.get(edge.from);
    const b = at.get(edge.to);
    if (!a || !b) continue;
    lines.push(
      `<line class="edge" x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}" data-edge="${esc(edge.from)}-${esc(edge.to)}" />`,
    );
  }
  return lines;
}

function obstacleBadges(mission: MissionJson): string[] {
  const at = new Map(mission.locations.map((l) => [l.name, l]));
  return mission.obstacles.flatMap((ob) => {
    const loc = at.get(ob.location);
    if (!loc) return [];
    return [
      `<g class="obstacle" data-obstacle="${esc(ob.id)}">` +
        `<rect x="${loc.x - 8}" y="${loc.y - 8}" width="16" height="16" />` +
        `<title>${esc(ob.id)} (${esc(ob.type)}) at ${esc(ob.location)}</title></g>`,
    ];
  });
}

function clusterHalos(clusters: ClusterJson[]): string[] {
  return clusters
    .filter((c) => c.status === "pending")
    .map(
      (c) =>
        `<circle class="cluster" data-cluster="${esc(c.id)}" cx="${c.centroid.x}" cy="${c.centroid.y}" r="14">` +
        `<title>${c.members.length} detection(s)</title></circle>`,
    );
}

function vehicleMarkers(mission: MissionJson): string[] {
  const at = new Map(mission.locations.map((l) => [l.name, l]));
  return mission.vehicles.flatMap((v) => {
    const loc = at.get(v.location);
    if (!loc) return [];
    return [
      `<g class="vehicle vehicle-${esc(v.kind)}" data-vehicle="${esc(v.name)}">` +
        `<circle cx="${loc.x}" cy="${loc.y}" r="6" />` +
        `<text x="${loc.x + 8}" y="${loc.y - 8}">${esc(v.name)}</text></g>`,
    ];
  });
}

function locationNodes(mission: MissionJson): string[] {
  const objective = mission.objective.location;
  return mission.locations.map(
    (l) =>
      `<g class="location${l.name === objective ? " objective" : ""}" data-location="${esc(l.name)}">` +
      `<circle cx="${l.x}" cy="${l.y}" r="4" />` +
      `<text x="${l.x + 6}" y="${l.y + 14}">${esc(l.name)}</text></g>`,
  );
}

/** Renders the mission graph with obstacles, pending clusters and vehicles. */
export function renderMission(snapshot: SnapshotJson): string {
  const mission = snapshot.mission;
  const parts = [
    `<svg class="mission" viewBox="${viewBox(mission)}" xmlns="http://www.w3.org/2000/svg">`,
    ...edgeLines(mission),
    ...locationNodes(mission),
    ...obstacleBadges(mission),
    ...clusterHalos(snapshot.clusters),
    ...vehicleMarkers(mission),
    "</svg>",
  ];
  return parts.join("\n");
}
