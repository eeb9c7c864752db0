/** Ego-network rendering: deterministic radial layout to an SVG string.
 *
 * The center director sits in the middle; companies form an inner ring;
 * addresses, owners and co-directors an outer ring. Pure string output so
 * tests can count rendered nodes without a DOM.
 */

import type { DirectorPayload, GraphNode } from "./types.js";

export interface PlacedNode {
  node: GraphNode;
  x: number;
  y: number;
}

const NODE_RADIUS: Record<string, number> = {
  director: 10,
  company: 8,
  address: 7,
  owner: 7,
};

const NODE_CLASS: Record<string, string> = {
  director: "node-director",
  company: "node-company",
  address: "node-address",
  owner: "node-owner",
};

export function layout(payload: DirectorPayload, size = 640): PlacedNode[] {
  const cx = size / 2;
  const cy = size / 2;
  const centerId = `d:${payload.director_id}`;
  const companies = payload.nodes.filter((n) => n.type === "company");
  const periphery = payload.nodes.filter(
    (n) => n.id !== centerId && n.type !== "company",
  );

  const placed: PlacedNode[] = [];
  const center = payload.nodes.find((n) => n.id === centerId);
  if (center === undefined) {
    throw new Error(`payload is missing its center node ${centerId}`);
  }
  placed.push({ node: center, x: cx, y: cy });

  const innerR = size * 0.2;
  companies.forEach((node, i) => {
    const angle = (2 * Math.PI * i) / Math.max(companies.length, 1);
    placed.push({
      node,
      x: cx + innerR * Math.cos(angle),
      y: cy + innerR * Math.sin(angle),
    });
  });

  const outerR = size * 0.4;
  periphery.forEach((node, i) => {
    const angle = (2 * Math.PI * i) / Math.max(periphery.length, 1);
    placed.push({
      node,
      x: cx + outerR * Math.cos(angle),
      y: cy + outerR * Math.sin(angle),
    });
  });
  return placed;
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function nodeLabel(node: GraphNode): string {
  if (node.type === "address") {
    return `${node.street ?? ""} ${node.number ?? ""}`.trim() || node.id;
  }
  if (node.type === "owner") {
    return `${node.id.slice(2)} (${node.country ?? "?"})`;
  }
  return node.name ?? node.id;
}

export function renderEgoSvg(payload: DirectorPayload, size = 640): string {
  const placed = layout(payload, size);
  const byId = new Map(placed.map((p) => [p.node.id, p]));

  const lines = payload.edges.map((edge) => {
    const a = byId.get(edge.source);
    const b = byId.get(edge.target);
    if (a === undefined || b === undefined) {
      throw new Error(`edge ${edge.source} -> ${edge.target} misses a node`);
    }
    const dashed = edge.status === "Previous" || edge.address_type === "Previous";
    return (
      `<line class="edge edge-${edge.kind}${dashed ? " edge-previous" : ""}" ` +
      `x1="${a.x.toFixed(1)}" y1="${a.y.toFixed(1)}" ` +
      `x2="${b.x.toFixed(1)}" y2="${b.y.toFixed(1)}"/>`
    );
  });

  const circles = placed.map((p) => {
    const r = NODE_RADIUS[p.node.type] ?? 6;
    const cls = NODE_CLASS[p.node.type] ?? "node-other";
    const title = escapeXml(nodeLabel(p.node));
    return (
      `<g class="node ${cls}" data-id="${escapeXml(p.node.id)}">` +
      `<circle cx="${p.x.toFixed(1)}" cy="${p.y.toFixed(1)}" r="${r}">` +
      `<title>${title}</title></circle>` +
      `<text x="${p.x.toFixed(1)}" y="${(p.y + r + 11).toFixed(1)}">` +
      `${title}</text></g>`
    );
  });

  return (
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${size} ${size}">` +
    lines.join("") +
    circles.join("") +
    `</svg>`
  );
}

export function countRenderedNodes(svg: string): number {
  return (svg.match(/<g class="node /g) ?? []).length;
}

export function countRenderedEdges(svg: string): number {
  return (svg.match(/<line /g) ?? []).length;
}
