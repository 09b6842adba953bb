// Cluster coloring: a fixed readable palette first, then golden-angle
// hues, so distinct cluster ids always map to distinct colors.

const PALETTE = [
  "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1", "#76b7b2",
  "#edc948", "#ff9da7", "#9c755f", "#bab0ac", "#86bcb6", "#d37295",
];

export function clusterColor(index: number): string {
  if (index < 0) {
    throw new Error("cluster index must be non-negative");
  }
  if (index < PALETTE.length) {
    return PALETTE[index];
  }
  const hue = ((index - PALETTE.length) * 137.508) % 360;
  return `hsl(${hue.toFixed(2)}, 65%, 52%)`;
}

/** node id -> color, one color per cluster (bijective with cluster ids). */
export function nodeColors(clusters: string[][]): Map<string, string> {
  const out = new Map<string, string>();
  clusters.forEach((members, index) => {
    const color = clusterColor(index);
    for (const node of members) {
      out.set(node, color);
    }
  });
  return out;
}
