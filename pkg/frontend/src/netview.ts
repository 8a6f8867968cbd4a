/** Client-side net diagram: a deterministic layered SVG layout computed from
 * the service's net payload. Silent transitions render as filled boxes,
 * initial/final places carry badges, and connected components (including
 * fully disconnected transitions) each get their own visual group. If layout
 * throws, the raw DOT text from the service is shown instead. */

import { NetPayload } from "./api.js";

const COLUMN_WIDTH = 150;
const ROW_HEIGHT = 90;
const MARGIN = 50;
const PLACE_RADIUS = 18;
const BOX_WIDTH = 44;
const BOX_HEIGHT = 32;

interface Node {
  id: string;
  kind: "place" | "transition";
  label: string;
  silent: boolean;
  initial: number;
  final: number;
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function collectNodes(net: NetPayload): Map<string, Node> {
  const nodes = new Map<string, Node>();
  for (const p of net.places) {
    nodes.set(p.id, {
      id: p.id,
      kind: "place",
      label: p.label,
      silent: false,
      initial: p.initial,
      final: p.final,
    });
  }
  for (const t of net.transitions) {
    nodes.set(t.id, {
      id: t.id,
      kind: "transition",
      label: t.label ?? "",
      silent: t.silent,
      initial: 0,
      final: 0,
    });
  }
  return nodes;
}

/** Connected components over the undirected arc structure; isolated nodes
 * form singleton components. Deterministic: components are ordered by their
 * smallest member id, members sorted within. */
function components(net: NetPayload, nodes: Map<string, Node>): string[][] {
  const neighbors = new Map<string, Set<string>>();
  for (const id of nodes.keys()) neighbors.set(id, new Set());
  for (const arc of net.arcs) {
    neighbors.get(arc.source)?.add(arc.target);
    neighbors.get(arc.target)?.add(arc.source);
  }
  const seen = new Set<string>();
  const out: string[][] = [];
  for (const start of [...nodes.keys()].sort()) {
    if (seen.has(start)) continue;
    const member: string[] = [];
    const queue = [start];
    seen.add(start);
    while (queue.length) {
      const id = queue.pop()!;
      member.push(id);
      for (const next of neighbors.get(id) ?? []) {
        if (!seen.has(next)) {
          seen.add(next);
          queue.push(next);
        }
      }
    }
    out.push(member.sort());
  }
  return out;
}

/** Layer assignment inside one component: breadth-first from the nodes with
 * no incoming arcs (or the smallest id on an all-cycle component), children
 * one column right of their furthest-laid parent. */
function assignLayers(member: string[], net: NetPayload): Map<string, number> {
  const inside = new Set(member);
  const outgoing = new Map<string, string[]>();
  const indegree = new Map<string, number>();
  for (const id of member) {
    outgoing.set(id, []);
    indegree.set(id, 0);
  }
  for (const arc of net.arcs) {
    if (inside.has(arc.source) && inside.has(arc.target)) {
      outgoing.get(arc.source)!.push(arc.target);
      indegree.set(arc.target, (indegree.get(arc.target) ?? 0) + 1);
    }
  }
  const layer = new Map<string, number>();
  let frontier = member.filter((id) => indegree.get(id) === 0);
  if (frontier.length === 0) {
    frontier = [member[0]!];
  }
  for (const id of frontier) layer.set(id, 0);
  const queue = [...frontier];
  while (queue.length) {
    const id = queue.shift()!;
    const depth = layer.get(id)!;
    for (const next of outgoing.get(id) ?? []) {
      const proposed = depth + 1;
      if (!layer.has(next)) {
        layer.set(next, proposed);
        queue.push(next);
      }
    }
  }
  for (const id of member) {
    if (!layer.has(id)) layer.set(id, 0);
  }
  return layer;
}

function renderNode(node: Node, x: number, y: number): string {
  if (node.kind === "place") {
    const badges: string[] = [];
    if (node.initial > 0) {
      badges.push(`<circle class="token" cx="${x}" cy="${y}" r="5" fill="#222"/>`);
    }
    if (node.final > 0) {
      badges.push(
        `<circle class="final-ring" cx="${x}" cy="${y}" r="${PLACE_RADIUS + 4}" fill="none" stroke="#222"/>`,
      );
    }
    const classes = ["place"];
    if (node.initial > 0) classes.push("initial");
    if (node.final > 0) classes.push("final");
    return (
      `<g class="${classes.join(" ")}" data-id="${node.id}">` +
      `<circle cx="${x}" cy="${y}" r="${PLACE_RADIUS}" fill="#fff" stroke="#222"/>` +
      badges.join("") +
      `<text x="${x}" y="${y + PLACE_RADIUS + 16}" text-anchor="middle" font-size="10">${escapeXml(node.label)}</text>` +
      `</g>`
    );
  }
  const left = x - BOX_WIDTH / 2;
  const top = y - BOX_HEIGHT / 2;
  if (node.silent) {
    return (
      `<g class="transition silent" data-id="${node.id}">` +
      `<rect x="${left}" y="${top}" width="${BOX_WIDTH}" height="${BOX_HEIGHT}" fill="#333" stroke="#111"/>` +
      `</g>`
    );
  }
  return (
    `<g class="transition labeled" data-id="${node.id}">` +
    `<rect x="${left}" y="${top}" width="${BOX_WIDTH}" height="${BOX_HEIGHT}" fill="#fff" stroke="#222"/>` +
    `<text x="${x}" y="${y + 4}" text-anchor="middle" font-size="12">${escapeXml(node.label)}</text>` +
    `</g>`
  );
}

function layoutSvg(net: NetPayload): string {
  const nodes = collectNodes(net);
  const groups = components(net, nodes);
  const position = new Map<string, { x: number; y: number }>();
  const fragments: string[] = [];
  let yOffset = 0;
  let maxWidth = 0;

  for (const member of groups) {
    const layers = assignLayers(member, net);
    const byLayer = new Map<number, string[]>();
    for (const id of member) {
      const l = layers.get(id)!;
      if (!byLayer.has(l)) byLayer.set(l, []);
      byLayer.get(l)!.push(id);
    }
    let depth = 0;
    let columns = 0;
    const body: string[] = [];
    for (const [l, ids] of [...byLayer.entries()].sort((a, b) => a[0] - b[0])) {
      ids.sort();
      columns = Math.max(columns, l + 1);
      ids.forEach((id, row) => {
        const x = MARGIN + l * COLUMN_WIDTH;
        const y = yOffset + MARGIN + row * ROW_HEIGHT;
        position.set(id, { x, y });
        body.push(renderNode(nodes.get(id)!, x, y));
        depth = Math.max(depth, row + 1);
      });
    }
    const edges: string[] = [];
    for (const arc of net.arcs) {
      const from = position.get(arc.source);
      const to = position.get(arc.target);
      if (!from || !to) continue;
      if (!member.includes(arc.source)) continue;
      edges.push(
        `<line class="arc" x1="${from.x}" y1="${from.y}" x2="${to.x}" y2="${to.y}" ` +
          `stroke="#555" marker-end="url(#arrow)"/>`,
      );
    }
    const height = MARGIN + depth * ROW_HEIGHT;
    maxWidth = Math.max(maxWidth, MARGIN * 2 + columns * COLUMN_WIDTH);
    fragments.push(`<g class="fragment" data-size="${member.length}">${edges.join("")}${body.join("")}</g>`);
    yOffset += height;
  }

  const totalHeight = yOffset + MARGIN;
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${maxWidth}" height="${totalHeight}" ` +
    `viewBox="0 0 ${maxWidth} ${totalHeight}">` +
    `<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="7" ` +
    `markerHeight="7" orient="auto-start-reverse"><path d="M 0 0 L 10 5 L 0 10 z" fill="#555"/>` +
    `</marker></defs>` +
    fragments.join("") +
    `</svg>`
  );
}

export function renderNet(net: NetPayload | null, dot: string): string {
  if (!net || (net.places.length === 0 && net.transitions.length === 0)) {
    return '<div class="placeholder">no places discovered</div>';
  }
  try {
    return layoutSvg(net);
  } catch {
    return `<pre class="dot-fallback">${escapeXml(dot)}</pre>`;
  }
}

/** Count the silent transitions visible in a rendered diagram. */
export function silentTransitionCount(svg: string): number {
  return (svg.match(/class="transition silent"/g) ?? []).length;
}

/** Count the visual fragment groups in a rendered diagram. */
export function fragmentCount(svg: string): number {
  return (svg.match(/class="fragment"/g) ?? []).length;
}
