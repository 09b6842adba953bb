// SVG Pareto scatter: plain DOM, axes from the view state, one clickable
// circle per solution.

import { scatterPoints, type FrontView } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 420;
const HEIGHT = 320;
const MARGIN = 42;

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

function scale(value: number, lo: number, hi: number, outLo: number, outHi: number): number {
  if (hi === lo) {
    return (outLo + outHi) / 2;
  }
  return outLo + ((value - lo) / (hi - lo)) * (outHi - outLo);
}

export function renderFront(
  container: HTMLElement,
  view: FrontView,
  onSelect: (index: number) => void,
): void {
  container.replaceChildren();
  const points = scatterPoints(view);
  if (points.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No solutions on the front yet.";
    container.appendChild(empty);
    return;
  }

  const xs = points.map((p) => p.x);
  const ys = points.map((p) => p.y);
  const [xLo, xHi] = [Math.min(...xs), Math.max(...xs)];
  const [yLo, yHi] = [Math.min(...ys), Math.max(...ys)];

  const svg = svgEl("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    class: "front-scatter",
    role: "img",
  });
  svg.appendChild(
    svgEl("line", {
      x1: `${MARGIN}`, y1: `${HEIGHT - MARGIN}`, x2: `${WIDTH - 10}`,
      y2: `${HEIGHT - MARGIN}`, class: "axis",
    }),
  );
  svg.appendChild(
    svgEl("line", {
      x1: `${MARGIN}`, y1: `${HEIGHT - MARGIN}`, x2: `${MARGIN}`, y2: "10", class: "axis",
    }),
  );
  const xLabel = svgEl("text", {
    x: `${WIDTH / 2}`, y: `${HEIGHT - 8}`, class: "axis-label", "text-anchor": "middle",
  });
  xLabel.textContent = `${view.axes[0]} (${xLo} .. ${xHi})`;
  svg.appendChild(xLabel);
  const yLabel = svgEl("text", {
    x: "12", y: `${HEIGHT / 2}`, class: "axis-label",
    transform: `rotate(-90 12 ${HEIGHT / 2})`, "text-anchor": "middle",
  });
  yLabel.textContent = `${view.axes[1]} (${formatNum(yLo)} .. ${formatNum(yHi)})`;
  svg.appendChild(yLabel);

  for (const p of points) {
    const cx = scale(p.x, xLo, xHi, MARGIN + 8, WIDTH - 20);
    const cy = scale(p.y, yLo, yHi, HEIGHT - MARGIN - 8, 20);
    const circle = svgEl("circle", {
      cx: `${cx}`,
      cy: `${cy}`,
      r: p.highlighted ? "7" : "5",
      class: p.highlighted ? "front-point highlighted" : "front-point",
      "data-index": `${p.index}`,
    });
    const tip = svgEl("title", {});
    tip.textContent =
      `#${p.index}: ${view.axes[0]}=${formatNum(p.x)}, ${view.axes[1]}=${formatNum(p.y)}, ` +
      `${p.n_sg} clusters`;
    circle.appendChild(tip);
    circle.addEventListener("click", () => onSelect(p.index));
    svg.appendChild(circle);
  }
  container.appendChild(svg);
}

export function formatNum(v: number): string {
  return Number.isInteger(v) ? `${v}` : v.toFixed(3);
}
