// Topology drawing: radial layout, cluster colors, removed edges dashed.

import { nodeColors } from "./colors.js";
import { clusteringConsistent, layoutPositions } from "./layout.js";
import type { UtilityDocument } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const SIZE = 420;
const R = 165;
const CENTER = SIZE / 2;

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) {
    el.setAttribute(k, v);
  }
  return el;
}

export function renderTopology(
  container: HTMLElement,
  utility: UtilityDocument,
  clusters: string[][],
  bits: string,
): void {
  container.replaceChildren();
  if (!clusteringConsistent(utility, clusters)) {
    const banner = document.createElement("div");
    banner.className = "banner error";
    banner.textContent = "Clustering is inconsistent with the topology; nothing rendered.";
    container.appendChild(banner);
    return;
  }

  const positions = layoutPositions(utility, clusters, R);
  const colors = nodeColors(clusters);
  const svg = svgEl("svg", { viewBox: `0 0 ${SIZE} ${SIZE}`, class: "topology-view" });

  utility.edges.forEach(([a, b], i) => {
    const pa = positions.get(a)!;
    const pb = positions.get(b)!;
    const removed = bits[i] === "1";
    svg.appendChild(
      svgEl("line", {
        x1: `${CENTER + pa.x}`,
        y1: `${CENTER + pa.y}`,
        x2: `${CENTER + pb.x}`,
        y2: `${CENTER + pb.y}`,
        class: removed ? "edge removed" : "edge kept",
      }),
    );
  });

  for (const node of utility.nodes) {
    const p = positions.get(node.id)!;
    const color = colors.get(node.id) ?? "#999";
    const x = CENTER + p.x;
    const y = CENTER + p.y;
    if (node.kind === "UCC") {
      svg.appendChild(
        svgEl("rect", {
          x: `${x - 9}`, y: `${y - 9}`, width: "18", height: "18",
          class: "node ucc", fill: color, "data-node": node.id,
        }),
      );
    } else {
      svg.appendChild(
        svgEl("circle", {
          cx: `${x}`, cy: `${y}`, r: "8", class: "node substation",
          fill: color, "data-node": node.id,
        }),
      );
    }
    const label = svgEl("text", {
      x: `${x}`, y: `${y - 12}`, class: "node-label", "text-anchor": "middle",
    });
    label.textContent = node.id.replace(`${utility.id}_`, "");
    svg.appendChild(label);
  }
  container.appendChild(svg);

  const legend = document.createElement("div");
  legend.className = "legend";
  clusters.forEach((members, i) => {
    const item = document.createElement("span");
    item.className = "legend-item";
    const swatch = document.createElement("span");
    swatch.className = "swatch";
    swatch.style.backgroundColor = colors.get(members[0]) ?? "#999";
    item.appendChild(swatch);
    item.appendChild(document.createTextNode(` zone ${i + 1} (${members.length})`));
    legend.appendChild(item);
  });
  container.appendChild(legend);
}
