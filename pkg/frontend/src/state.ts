// Pure view state: a function of (API data, user selections) only, so
// reloading and replaying selections reproduces identical views.

import type { ObjectiveName, ResultDocument, Solution } from "./types.js";

export interface FrontView {
  runId: string;
  utilityId: string;
  solutions: Solution[];
  feasible: boolean;
  axes: [ObjectiveName, ObjectiveName];
  highlighted: number | null;
}

export function createFrontView(runId: string, doc: ResultDocument): FrontView {
  return {
    runId,
    utilityId: doc.utility.id,
    solutions: doc.solutions,
    feasible: doc.feasible,
    axes: ["F1", "F3"],
    // a single point needs no click to be inspectable
    highlighted: doc.solutions.length === 1 ? 0 : null,
  };
}

export function setAxes(view: FrontView, x: ObjectiveName, y: ObjectiveName): FrontView {
  if (x === y) {
    throw new Error("scatter axes must be two distinct objectives");
  }
  return { ...view, axes: [x, y] };
}

export function highlight(view: FrontView, index: number): FrontView {
  if (index < 0 || index >= view.solutions.length) {
    throw new Error(`solution ${index} is not on the front`);
  }
  return { ...view, highlighted: index };
}

/** Display value of one objective (F3 is shown in maximized form, as stored). */
export function axisValue(solution: Solution, name: ObjectiveName): number {
  switch (name) {
    case "F1":
      return solution.objectives.f1;
    case "F2":
      return solution.objectives.f2;
    case "F3":
      return solution.objectives.f3;
    case "F4":
      return solution.objectives.f4;
  }
}

export interface ScatterPoint {
  index: number;
  x: number;
  y: number;
  n_sg: number;
  highlighted: boolean;
}

export function scatterPoints(view: FrontView): ScatterPoint[] {
  const [ax, ay] = view.axes;
  return view.solutions.map((s, index) => ({
    index,
    x: axisValue(s, ax),
    y: axisValue(s, ay),
    n_sg: s.n_sg,
    highlighted: view.highlighted === index,
  }));
}

export function solutionDetail(view: FrontView): Solution | null {
  return view.highlighted === null ? null : view.solutions[view.highlighted];
}
