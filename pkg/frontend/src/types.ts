// Payload shapes of the zoneopt HTTP API (the server's values are
// authoritative; the client never recomputes objectives).

export type ObjectiveName = "F1" | "F2" | "F3" | "F4";

export const OBJECTIVE_NAMES: ObjectiveName[] = ["F1", "F2", "F3", "F4"];

export interface ObjectiveValues {
  f1: number;
  f2: number;
  f3: number;
  f4: number;
}

export interface Solution {
  bits: string;
  objectives: ObjectiveValues;
  fs_metric: number;
  n_sg: number;
  violation: { g1: number; g2: number; g3: number; total: number };
  clusters: string[][];
}

export interface UtilityNode {
  id: string;
  kind: "UCC" | "Substation" | "BA";
  profile?: { iso: number; cb: number; xline: number; xfmr: number };
}

export interface UtilityDocument {
  id: string;
  ucc_id: string;
  nodes: UtilityNode[];
  edges: [string, string][];
}

export interface ResultDocument {
  format: string;
  utility: UtilityDocument;
  utility_index: number;
  config: {
    ga: Record<string, unknown>;
    objectives: ObjectiveName[];
    constraints: { p_min: number; p_max: number; n_p_min: number };
    weights: Record<string, number>;
  };
  seed: number;
  feasible: boolean;
  metadata: { evaluations: number; cache_hits: number; generations: number; dec_var: number };
  solutions: Solution[];
}

export interface RunStatus {
  id: string;
  status: "queued" | "running" | "completed" | "failed";
  feasible: boolean | null;
  utilities: string[];
  solutions: number | null;
  evaluations: number | null;
  wall_time_s: number | null;
  error: string | null;
}

export interface ClusteringResponse {
  utility: string;
  solution_index: number;
  bits: string;
  n_sg: number;
  objectives: ObjectiveValues;
  clusters: string[][];
}

export interface DeviceEntry {
  device: string;
  role: string;
  cluster: number;
  file: string;
  sha256: string;
  acl_entries: number;
}

export interface Manifest {
  utility: string;
  devices: DeviceEntry[];
  bundle_sha256: string;
  solution?: { index: number; bits: string; selector: string };
}

export interface AuditReport {
  expected_firewalls: number;
  actual_firewalls: number;
  expected_acls: number;
  actual_acls: number;
  mismatches: { device: string; expected: number; actual: number; delta: number }[];
  ok: boolean;
}

export interface EmitResponse {
  utility: string;
  solution_index: number;
  bits: string;
  files: Record<string, string>;
  manifest: Manifest;
  audit: AuditReport;
}

export interface RunRequestBody {
  ga: {
    population_size: number;
    max_generations: number;
    offspring_size: number | null;
    crossover_points: number;
    crossover_prob: number;
    mutation_prob: number | string;
    seed: number;
  };
  objectives: ObjectiveName[];
  constraints: { p_min: number; p_max: number; n_p_min: number };
  weights?: Record<string, number>;
  parallelism?: number;
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
