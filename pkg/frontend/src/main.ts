// App wiring: run form -> POST /runs -> poll -> front scatter ->
// clustering + config preview -> archive download.

import { ApiClient, ApiError, pollRun } from "./api.js";
import { archiveFiles, zipStore } from "./archive.js";
import { bundleChecksum } from "./checksum.js";
import { renderTopology } from "./graphview.js";
import { renderFront } from "./scatter.js";
import {
  createFrontView,
  highlight,
  setAxes,
  solutionDetail,
  type FrontView,
} from "./state.js";
import type { EmitResponse, ObjectiveName, ResultDocument } from "./types.js";
import { toRunRequest, validateForm, type FormValues } from "./validate.js";

const api = new ApiClient("");

interface AppState {
  view: FrontView | null;
  doc: ResultDocument | null;
  emit: EmitResponse | null;
}

const state: AppState = { view: null, doc: null, emit: null };

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) {
    throw new Error(`missing element #${id}`);
  }
  return found as T;
}

function setBanner(kind: "info" | "error" | "warn" | "", text: string) {
  const banner = el<HTMLDivElement>("banner");
  banner.className = kind ? `banner ${kind}` : "banner hidden";
  banner.textContent = text;
}

function readForm(): FormValues {
  const num = (id: string) => Number(el<HTMLInputElement>(id).value);
  const objectives = ["F1", "F2", "F3", "F4"].filter(
    (name) => el<HTMLInputElement>(`obj-${name}`).checked,
  ) as ObjectiveName[];
  const offspringRaw = el<HTMLInputElement>("offspring").value.trim();
  return {
    population_size: num("population"),
    max_generations: num("generations"),
    offspring_size: offspringRaw === "" ? null : Number(offspringRaw),
    crossover_points: num("crossover-points"),
    crossover_prob: num("crossover-prob"),
    mutation_prob: el<HTMLInputElement>("mutation").value,
    seed: num("seed"),
    objectives,
    p_min: num("p-min"),
    p_max: num("p-max"),
    n_p_min: num("n-p-min"),
  };
}

function showFormErrors(errors: Record<string, string>) {
  const box = el<HTMLUListElement>("form-errors");
  box.replaceChildren();
  for (const message of Object.values(errors)) {
    const item = document.createElement("li");
    item.textContent = message;
    box.appendChild(item);
  }
}

async function launchRun() {
  const values = readForm();
  const { ok, errors } = validateForm(values);
  showFormErrors(errors as Record<string, string>);
  if (!ok) {
    return;
  }
  const button = el<HTMLButtonElement>("launch");
  button.disabled = true;
  setBanner("info", "submitting run...");
  try {
    const { id } = await api.createRun(toRunRequest(values));
    const status = await pollRun(api, id, (s) => {
      setBanner("info", `run ${s.id}: ${s.status}`);
    });
    if (status.status === "failed") {
      setBanner("error", `run ${id} failed: ${status.error ?? "unknown error"}`);
      return;
    }
    await loadFront(id);
  } catch (err) {
    if (err instanceof ApiError) {
      setBanner("error", `${err.code}: ${err.message}`);
    } else {
      setBanner("error", String(err));
    }
  } finally {
    button.disabled = false;
  }
}

async function loadFront(runId: string) {
  const docs = await api.front(runId);
  const doc = docs[0];
  state.doc = doc;
  state.view = createFrontView(runId, doc);
  state.emit = null;
  if (!doc.feasible) {
    setBanner("warn", "no feasible solutions: showing the least-violation set");
  } else {
    setBanner("info", `run ${runId}: ${doc.solutions.length} Pareto solutions`);
  }
  redraw();
  if (state.view.highlighted !== null) {
    await inspectSolution(state.view.highlighted);
  }
}

function redraw() {
  if (!state.view) {
    return;
  }
  renderFront(el("scatter"), state.view, (index) => {
    void inspectSolution(index);
  });
  const detail = solutionDetail(state.view);
  const info = el<HTMLDivElement>("solution-detail");
  if (detail) {
    info.textContent =
      `solution #${state.view.highlighted}: F1=${detail.objectives.f1} ` +
      `F2=${detail.objectives.f2} F3=${detail.objectives.f3.toFixed(3)} ` +
      `F4=${detail.objectives.f4.toFixed(3)} | ${detail.n_sg} clusters | ` +
      `cost F1+F2=${detail.fs_metric}`;
  } else {
    info.textContent = "click a point to inspect a solution";
  }
}

async function inspectSolution(index: number) {
  if (!state.view || !state.doc) {
    return;
  }
  state.view = highlight(state.view, index);
  redraw();
  const clustering = await api.clustering(state.view.runId, index);
  renderTopology(el("topology"), state.doc.utility, clustering.clusters, clustering.bits);
  const emitted = await api.emit(state.view.runId, index);
  state.emit = emitted;
  renderConfigPreview(emitted);
}

function renderConfigPreview(emitted: EmitResponse) {
  const list = el<HTMLSelectElement>("config-file");
  list.replaceChildren();
  for (const name of Object.keys(emitted.files).sort()) {
    const option = document.createElement("option");
    option.value = name;
    option.textContent = name;
    list.appendChild(option);
  }
  const first = Object.keys(emitted.files).sort()[0];
  el<HTMLPreElement>("config-text").textContent = first ? emitted.files[first] : "";
  el<HTMLSpanElement>("audit-state").textContent = emitted.audit.ok
    ? "audit clean"
    : `AUDIT MISMATCH: ${JSON.stringify(emitted.audit.mismatches)}`;
  el<HTMLSpanElement>("bundle-sum").textContent = emitted.manifest.bundle_sha256;
  el<HTMLButtonElement>("download").disabled = false;
}

async function downloadArchive() {
  if (!state.emit) {
    return;
  }
  const files = archiveFiles(state.emit);
  const recomputed = await bundleChecksum(state.emit.files);
  if (recomputed !== state.emit.manifest.bundle_sha256) {
    setBanner("error", "bundle checksum mismatch between client and server");
    return;
  }
  const archive = zipStore(files);
  const blob = new Blob([archive.buffer as ArrayBuffer], { type: "application/zip" });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = `${state.emit.utility}_solution${state.emit.solution_index}.zip`;
  anchor.click();
  URL.revokeObjectURL(url);
}

async function boot() {
  el<HTMLButtonElement>("launch").addEventListener("click", () => void launchRun());
  el<HTMLButtonElement>("download").addEventListener("click", () => void downloadArchive());
  el<HTMLSelectElement>("config-file").addEventListener("change", (ev) => {
    const name = (ev.target as HTMLSelectElement).value;
    if (state.emit && name in state.emit.files) {
      el<HTMLPreElement>("config-text").textContent = state.emit.files[name];
    }
  });
  for (const axis of ["x", "y"] as const) {
    el<HTMLSelectElement>(`axis-${axis}`).addEventListener("change", () => {
      if (!state.view) {
        return;
      }
      const x = el<HTMLSelectElement>("axis-x").value as ObjectiveName;
      const y = el<HTMLSelectElement>("axis-y").value as ObjectiveName;
      if (x === y) {
        setBanner("warn", "pick two distinct objectives");
        return;
      }
      state.view = setAxes(state.view, x, y);
      redraw(); // client-side re-plot, no refetch
    });
  }

  try {
    const topo = await api.topology();
    const utilities = topo.utilities as { id: string; nodes: unknown[] }[];
    el<HTMLSpanElement>("topology-summary").textContent = utilities
      .map((u) => `${u.id} (${u.nodes.length} nodes)`)
      .join(", ");
  } catch (err) {
    if (err instanceof ApiError && err.code === "unreachable") {
      setBanner("error", "server unreachable; retry once it is up");
    } else if (err instanceof ApiError) {
      setBanner("warn", `${err.code}: ${err.message}`);
    }
  }
}

if (typeof document !== "undefined" && document.getElementById("launch")) {
  void boot();
}
