import { describe, expect, it } from "vitest";

import {
  createFrontView,
  highlight,
  scatterPoints,
  setAxes,
  solutionDetail,
} from "../src/state";
import type { ResultDocument, Solution } from "../src/types";

function solution(f1: number, f2: number, f3: number, f4: number, n_sg: number): Solution {
  return {
    bits: "0".repeat(8),
    objectives: { f1, f2, f3, f4 },
    fs_metric: f1 + f2,
    n_sg,
    violation: { g1: 0, g2: 0, g3: 0, total: 0 },
    clusters: [],
  };
}

// The published six-row sample front (F1, F2, F3, F4, clusters).
const TABLE_FRONT: Solution[] = [
  solution(12, 101, 0.98, 0.3, 6),
  solution(14, 117, 2.88, 1.23, 9),
  solution(16, 133, 4.21, 1.03, 12),
  solution(20, 165, 5.68, 1.03, 15),
  solution(18, 149, 6.87, 0.41, 18),
  solution(34, 277, 8.38, 0.41, 21),
];

function doc(solutions: Solution[]): ResultDocument {
  return {
    format: "zoneopt-result/1",
    utility: { id: "U01", ucc_id: "U01_UCC", nodes: [], edges: [] },
    utility_index: 0,
    config: {
      ga: {},
      objectives: ["F1", "F2", "F3", "F4"],
      constraints: { p_min: 2, p_max: 40, n_p_min: 1 },
      weights: {},
    },
    seed: 0,
    feasible: true,
    metadata: { evaluations: 0, cache_hits: 0, generations: 0, dec_var: 8 },
    solutions,
  };
}

describe("front view", () => {
  it("renders six points for the published sample front", () => {
    const view = createFrontView("run-0001", doc(TABLE_FRONT));
    expect(scatterPoints(view)).toHaveLength(6);
    expect(view.highlighted).toBeNull();
  });

  it("selecting the F1=12 point shows the 6-cluster detail", () => {
    let view = createFrontView("run-0001", doc(TABLE_FRONT));
    const index = scatterPoints(view).find((p) => p.x === 12)!.index;
    view = highlight(view, index);
    const detail = solutionDetail(view)!;
    expect(detail.n_sg).toBe(6);
    expect(detail.objectives.f2).toBe(101);
  });

  it("auto-highlights a single-solution front", () => {
    const view = createFrontView("run-0002", doc([TABLE_FRONT[0]]));
    expect(view.highlighted).toBe(0);
  });

  it("axis switch re-projects the same solutions without refetching", () => {
    const view = createFrontView("run-0001", doc(TABLE_FRONT));
    const before = scatterPoints(view).map((p) => [p.x, p.y]);
    const switched = setAxes(view, "F3", "F4");
    const after = scatterPoints(switched).map((p) => [p.x, p.y]);
    expect(before[0]).toEqual([12, 0.98]);
    expect(after[0]).toEqual([0.98, 0.3]);
    expect(switched.solutions).toBe(view.solutions); // same data, new projection
  });

  it("rejects identical axes", () => {
    const view = createFrontView("run-0001", doc(TABLE_FRONT));
    expect(() => setAxes(view, "F2", "F2")).toThrow(/distinct/);
  });

  it("rejects highlighting a point that is not on the front", () => {
    const view = createFrontView("run-0001", doc(TABLE_FRONT));
    expect(() => highlight(view, 17)).toThrow(/not on the front/);
  });

  it("empty fronts produce no points", () => {
    const view = createFrontView("run-0003", doc([]));
    expect(scatterPoints(view)).toHaveLength(0);
    expect(solutionDetail(view)).toBeNull();
  });
});
