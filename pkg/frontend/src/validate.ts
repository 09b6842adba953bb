// Client-side validation of the run form against the published parameter
// ranges, so obviously-bad configs never reach the server.

import type { ObjectiveName, RunRequestBody } from "./types.js";

export interface FormValues {
  population_size: number;
  max_generations: number;
  offspring_size: number | null; // null -> same as population
  crossover_points: number;
  crossover_prob: number;
  mutation_prob: string; // numeric text or "1/dec_var"
  seed: number;
  objectives: ObjectiveName[];
  p_min: number;
  p_max: number;
  n_p_min: number;
}

export interface ValidationResult {
  ok: boolean;
  errors: Partial<Record<keyof FormValues, string>>;
}

export function validateForm(values: FormValues): ValidationResult {
  const errors: ValidationResult["errors"] = {};
  if (!Number.isInteger(values.population_size) || values.population_size < 50 || values.population_size > 200) {
    errors.population_size = "population must be an integer in [50, 200]";
  }
  if (!Number.isInteger(values.max_generations) || values.max_generations < 1) {
    errors.max_generations = "generations must be a positive integer";
  }
  if (values.offspring_size !== null) {
    if (!Number.isInteger(values.offspring_size) || values.offspring_size < 10 || values.offspring_size > 200) {
      errors.offspring_size = "offspring must be an integer in [10, 200] (blank = population size)";
    }
  }
  if (!Number.isInteger(values.crossover_points) || values.crossover_points < 10 || values.crossover_points > 50) {
    errors.crossover_points = "crossover points must be an integer in [10, 50]";
  }
  if (!(values.crossover_prob >= 0 && values.crossover_prob <= 1)) {
    errors.crossover_prob = "crossover probability must be in [0, 1]";
  }
  if (values.mutation_prob.trim() !== "1/dec_var") {
    const p = Number(values.mutation_prob);
    if (!Number.isFinite(p) || p < 0 || p > 1) {
      errors.mutation_prob = "mutation must be a probability in [0, 1] or '1/dec_var'";
    }
  }
  if (!Number.isInteger(values.seed)) {
    errors.seed = "seed must be an integer";
  }
  if (values.objectives.length < 2) {
    errors.objectives = "select at least two objectives";
  }
  if (!Number.isInteger(values.p_min) || values.p_min < 1) {
    errors.p_min = "minimum clusters must be a positive integer";
  } else if (!Number.isInteger(values.p_max) || values.p_max < values.p_min) {
    errors.p_max = "maximum clusters must be >= the minimum";
  }
  if (!Number.isInteger(values.n_p_min) || values.n_p_min < 1) {
    errors.n_p_min = "minimum nodes per cluster must be a positive integer";
  }
  return { ok: Object.keys(errors).length === 0, errors };
}

export function toRunRequest(values: FormValues): RunRequestBody {
  const mutation =
    values.mutation_prob.trim() === "1/dec_var" ? "1/dec_var" : Number(values.mutation_prob);
  return {
    ga: {
      population_size: values.population_size,
      max_generations: values.max_generations,
      offspring_size: values.offspring_size,
      crossover_points: values.crossover_points,
      crossover_prob: values.crossover_prob,
      mutation_prob: mutation,
      seed: values.seed,
    },
    objectives: values.objectives,
    constraints: { p_min: values.p_min, p_max: values.p_max, n_p_min: values.n_p_min },
  };
}
