// Deterministic radial layout: the UCC sits at the center and clusters
// occupy contiguous angular sectors, so the same clustering always draws
// the same picture.

import type { UtilityDocument } from "./types.js";

export interface NodePosition {
  x: number;
  y: number;
}

export function layoutPositions(
  utility: UtilityDocument,
  clusters: string[][],
  radius = 1.0,
): Map<string, NodePosition> {
  const positions = new Map<string, NodePosition>();
  const ucc = utility.ucc_id;
  positions.set(ucc, { x: 0, y: 0 });

  const ring: string[] = [];
  for (const cluster of clusters) {
    for (const node of [...cluster].sort()) {
      if (node !== ucc) {
        ring.push(node);
      }
    }
  }
  const n = ring.length;
  ring.forEach((node, i) => {
    const angle = (2 * Math.PI * i) / Math.max(n, 1) - Math.PI / 2;
    positions.set(node, {
      x: radius * Math.cos(angle),
      y: radius * Math.sin(angle),
    });
  });
  return positions;
}

/** Clusters must partition the node set exactly; anything else is a render error. */
export function clusteringConsistent(utility: UtilityDocument, clusters: string[][]): boolean {
  const expected = new Set(utility.nodes.map((n) => n.id));
  const seen = new Set<string>();
  for (const cluster of clusters) {
    for (const node of cluster) {
      if (!expected.has(node) || seen.has(node)) {
        return false;
      }
      seen.add(node);
    }
  }
  return seen.size === expected.size;
}
