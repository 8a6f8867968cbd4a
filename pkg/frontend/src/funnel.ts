/** Stage-statistics panel: the five-stage candidate funnel, repair telemetry,
 * and the disconnected-transition action. Pure HTML-string rendering; every
 * displayed number is read straight from a service response field. */

import { DisconnectedListing, StageReport } from "./api.js";

const STAGE_LABELS: ReadonlyArray<[keyof StageReport["funnel"], string]> = [
  ["cnd0", "enumerated"],
  ["cnd1", "after balance"],
  ["cnd2", "after fitness"],
  ["sel", "selected"],
  ["places", "places kept"],
];

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderFunnel(
  report: StageReport | null,
  disconnected: DisconnectedListing | null = null,
  stale = false,
): string {
  if (!report) {
    return '<div class="funnel empty">no stage report (classical baseline or no run yet)</div>';
  }
  const max = Math.max(report.funnel.cnd0, 1);
  const rows = STAGE_LABELS.map(([key, label]) => {
    const count = report.funnel[key];
    const width = Math.max(Math.round((count / max) * 100), 1);
    return (
      `<div class="stage" data-stage="${key}">` +
      `<span class="label">${label}</span>` +
      `<span class="bar" style="width:${width}%"></span>` +
      `<span class="count">${count}</span>` +
      `</div>`
    );
  }).join("");

  const repair = report.repair;
  const loops = repair.loops.map((l) => `${l.from}&rarr;${l.to}`).join(", ") || "none";
  const removed = repair.removed_activities.map(escapeHtml).join(", ") || "none";
  const repairHtml =
    `<div class="repair">` +
    `<span data-field="loop-insertions">loop insertions: ${repair.insertions.loop}</span>` +
    `<span data-field="skip-insertions">skip insertions: ${repair.insertions.skip}</span>` +
    `<span data-field="loops">loops: ${loops}</span>` +
    `<span data-field="removed">removed activities: ${removed}</span>` +
    `</div>`;

  const count = disconnected?.count ?? 0;
  const disconnectedHtml =
    `<div class="disconnected" data-count="${count}">` +
    `${count} disconnected transition${count === 1 ? "" : "s"}` +
    (count > 0
      ? ` <button data-action="remove-greedy" data-k="${count}">remove greedily</button>`
      : "") +
    `</div>`;

  const staleHtml = stale
    ? '<div class="stale-warning">settings changed since this run</div>'
    : "";

  return `<div class="funnel">${staleHtml}${rows}${repairHtml}${disconnectedHtml}</div>`;
}

/** Extract the five displayed stage counts back out of the rendered panel
 * (used by tests to confirm the display is a verbatim copy of the payload). */
export function displayedCounts(html: string): Record<string, number> {
  const out: Record<string, number> = {};
  const pattern = /data-stage="(\w+)"[^>]*>.*?<span class="count">(\d+)<\/span>/g;
  for (const match of html.matchAll(pattern)) {
    out[match[1]!] = Number(match[2]!);
  }
  return out;
}
