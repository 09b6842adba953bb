"""Run configuration, result documents, and per-utility execution.

Both the CLI and the HTTP service go through this layer, so their outputs
are byte-identical for the same configuration. Result documents are fully
deterministic (wall-clock timing lives in a separate sidecar and the
service's job metadata, never in result files).
"""

from __future__ import annotations

import json
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

from .fitness import ConstraintParams, OBJECTIVE_NAMES, Problem
from .fwgen import audit_counts, emit_clustering, render_all
from .grid_physics import (
    GridLine,
    GridModel,
    LodfTable,
    Weights,
    compute_lodf,
    lodf_from_overrides,
    synth_grid,
)
from .nsga2 import GaParams, ParetoFront, run
from .reporting import RunSummary, SolutionRow, select_solution
from .topology import (
    Chromosome,
    SystemModel,
    UtilityGraph,
    decompose,
    load_topology,
    synth_hybrid,
    synth_star,
    utility_to_document,
)
from .topology import _parse_utility as utility_from_document

RESULT_FORMAT = "zoneopt-result/1"


class ConfigError(ValueError):
    pass


@dataclass
class SynthSpec:
    subs: int
    utilities: int = 1
    topology: str = "star"  # star | hybrid
    edge_prob: float = 0.15
    seed: int = 0
    grid: bool = True
    grid_extra_line_prob: float = 0.15

    def validate(self):
        if self.subs < 1:
            raise ConfigError("synthesis needs at least one substation per utility")
        if self.utilities < 1:
            raise ConfigError("synthesis needs at least one utility")
        if self.topology not in ("star", "hybrid"):
            raise ConfigError(f"unknown topology kind {self.topology!r}")
        if not 0.0 <= self.edge_prob <= 1.0:
            raise ConfigError("edge_prob must be in [0, 1]")

    def as_dict(self) -> dict:
        return {
            "utilities": self.utilities,
            "subs": self.subs,
            "topology": self.topology,
            "edge_prob": self.edge_prob,
            "seed": self.seed,
            "grid": self.grid,
            "grid_extra_line_prob": self.grid_extra_line_prob,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "SynthSpec":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown synthesis keys: {sorted(unknown)}")
        if "subs" not in doc:
            raise ConfigError("synthesis spec requires 'subs'")
        return cls(**{k: doc[k] for k in doc})


def synthesize_system(spec: SynthSpec) -> SystemModel:
    """Deterministic multi-utility system (plus optional physical grid)."""
    spec.validate()
    utilities = []
    for k in range(spec.utilities):
        uid = f"U{k + 1:02d}"
        useed = spec.seed * 1009 + k
        if spec.topology == "star":
            utilities.append(synth_star(spec.subs, utility_id=uid))
        else:
            utilities.append(synth_hybrid(spec.subs, spec.edge_prob, seed=useed, utility_id=uid))

    grid = None
    if spec.grid:
        buses: list[str] = []
        lines: list[GridLine] = []
        firsts: list[str] = []
        for k, u in enumerate(utilities):
            subs = u.substation_ids()
            g = synth_grid(
                subs,
                seed=spec.seed * 2003 + k,
                extra_line_prob=spec.grid_extra_line_prob,
                line_prefix=f"{u.id}_L",
            )
            buses.extend(g.buses)
            lines.extend(g.lines)
            firsts.append(subs[0])
        for i in range(len(firsts) - 1):
            lines.append(
                GridLine(
                    id=f"TIE_{i + 1:02d}",
                    from_bus=f"B_{firsts[i]}",
                    to_bus=f"B_{firsts[i + 1]}",
                    x=0.2,
                    from_sub=firsts[i],
                    to_sub=firsts[i + 1],
                )
            )
        grid = GridModel(buses=tuple(buses), slack=buses[0], lines=tuple(lines))
    return SystemModel(utilities=tuple(utilities), grid=grid)


# ---------------------------------------------------------------------------
# Run configuration


@dataclass
class RunConfig:
    topology_path: Optional[str] = None
    synth: Optional[SynthSpec] = None
    ga: GaParams = field(default_factory=GaParams)
    objectives: tuple[str, ...] = OBJECTIVE_NAMES
    constraints: ConstraintParams = field(default_factory=ConstraintParams)
    weights: Weights = field(default_factory=Weights)
    parallelism: int = 1
    output_dir: Optional[str] = None

    def validate_params(self):
        """Everything except the topology source (the service supplies systems directly)."""
        if self.synth is not None:
            self.synth.validate()
        try:
            self.ga.validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        seen = set()
        for name in self.objectives:
            if name not in OBJECTIVE_NAMES:
                raise ConfigError(f"unknown objective {name!r}")
            if name in seen:
                raise ConfigError(f"objective {name!r} listed twice")
            seen.add(name)
        if len(self.objectives) < 2:
            raise ConfigError("at least two objectives are required")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be at least 1")

    def validate(self):
        if (self.topology_path is None) == (self.synth is None):
            raise ConfigError("exactly one of topology path or synthesis spec is required")
        self.validate_params()

    def as_dict(self) -> dict:
        doc: dict = {
            "ga": ga_to_dict(self.ga),
            "objectives": list(self.objectives),
            "constraints": {
                "p_min": self.constraints.p_min,
                "p_max": self.constraints.p_max,
                "n_p_min": self.constraints.n_p_min,
            },
            "weights": {
                "iso": self.weights.iso,
                "cb": self.weights.cb,
                "xline": self.weights.xline,
                "xfmr": self.weights.xfmr,
            },
            "parallelism": self.parallelism,
        }
        if self.topology_path is not None:
            doc["topology"] = self.topology_path
        if self.synth is not None:
            doc["synth"] = self.synth.as_dict()
        if self.output_dir is not None:
            doc["output_dir"] = self.output_dir
        return doc


def ga_to_dict(ga: GaParams) -> dict:
    return {
        "population_size": ga.population_size,
        "max_generations": ga.max_generations,
        "offspring_size": ga.offspring_size,
        "crossover_points": ga.crossover_points,
        "crossover_prob": ga.crossover_prob,
        "mutation_prob": ga.mutation_prob,
        "seed": ga.seed,
    }


def ga_from_dict(doc: Mapping) -> GaParams:
    known = set(GaParams.__dataclass_fields__)
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown ga keys: {sorted(unknown)}")
    return GaParams(**{k: doc[k] for k in doc})


def constraints_from_dict(doc: Mapping) -> ConstraintParams:
    known = {"p_min", "p_max", "n_p_min"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown constraint keys: {sorted(unknown)}")
    try:
        return ConstraintParams(**{k: int(doc[k]) for k in doc})
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def weights_from_dict(doc: Mapping) -> Weights:
    known = {"iso", "cb", "xline", "xfmr"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown weight keys: {sorted(unknown)}")
    try:
        return Weights(**{k: float(doc[k]) for k in doc})
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def run_config_from_document(doc: Mapping, require_source: bool = True) -> RunConfig:
    known = {"topology", "synth", "ga", "objectives", "constraints", "weights",
             "parallelism", "output_dir"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown run-config keys: {sorted(unknown)}")
    try:
        cfg = RunConfig(
            topology_path=doc.get("topology"),
            synth=SynthSpec.from_dict(doc["synth"]) if doc.get("synth") else None,
            ga=ga_from_dict(doc.get("ga", {})),
            objectives=tuple(doc.get("objectives", OBJECTIVE_NAMES)),
            constraints=constraints_from_dict(doc.get("constraints", {})),
            weights=weights_from_dict(doc.get("weights", {})),
            parallelism=int(doc.get("parallelism", 1)),
            output_dir=doc.get("output_dir"),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if require_source:
        cfg.validate()
    else:
        cfg.validate_params()
    return cfg


def resolve_system(config: RunConfig) -> SystemModel:
    if config.topology_path is not None:
        return load_topology(config.topology_path)
    return synthesize_system(config.synth)


def prepare_lodf(system: SystemModel) -> Optional[LodfTable]:
    if system.grid is None:
        return None
    if system.lodf_overrides is not None:
        return lodf_from_overrides(system.grid.lines, system.lodf_overrides)
    return compute_lodf(system.grid)


def utility_seed(master_seed: int, utility_id: str) -> int:
    """Stable per-utility seed independent of run order and process layout."""
    return (master_seed * 1000003 + zlib.crc32(utility_id.encode("utf-8"))) % 2**32


# ---------------------------------------------------------------------------
# Execution


@dataclass
class UtilityRunResult:
    utility_id: str
    document: dict
    feasible: bool
    wall_time_s: float


def result_document(
    graph: UtilityGraph,
    utility_index: int,
    front: ParetoFront,
    config: RunConfig,
    seed: int,
) -> dict:
    solutions = []
    for sol in front.solutions:
        clustering = decompose(graph, sol.chromosome)
        solutions.append(
            {
                "bits": sol.chromosome.to_string(),
                "objectives": sol.objectives.as_dict(),
                "fs_metric": sol.objectives.fs_metric,
                "n_sg": sol.n_sg,
                "violation": sol.violation.as_dict(),
                "clusters": clustering.as_lists(),
            }
        )
    return {
        "format": RESULT_FORMAT,
        "utility": utility_to_document(graph),
        "utility_index": utility_index,
        "config": {
            "ga": ga_to_dict(config.ga),
            "objectives": list(config.objectives),
            "constraints": {
                "p_min": config.constraints.p_min,
                "p_max": config.constraints.p_max,
                "n_p_min": config.constraints.n_p_min,
            },
            "weights": {
                "iso": config.weights.iso,
                "cb": config.weights.cb,
                "xline": config.weights.xline,
                "xfmr": config.weights.xfmr,
            },
        },
        "seed": seed,
        "feasible": front.feasible,
        "metadata": {
            "evaluations": front.metadata.evaluations,
            "cache_hits": front.metadata.cache_hits,
            "generations": front.metadata.generations,
            "dec_var": front.metadata.dec_var,
        },
        "solutions": solutions,
    }


def run_one_utility(
    graph: UtilityGraph,
    utility_index: int,
    config: RunConfig,
    lodf: Optional[LodfTable],
) -> UtilityRunResult:
    started = time.perf_counter()
    seed = utility_seed(config.ga.seed, graph.id)
    ga = GaParams(**{**ga_to_dict(config.ga), "seed": seed})
    problem = Problem(
        graph,
        params=config.constraints,
        weights=config.weights,
        lodf=lodf,
        objectives=config.objectives,
    )
    front = run(problem, ga)
    doc = result_document(graph, utility_index, front, config, seed)
    return UtilityRunResult(
        utility_id=graph.id,
        document=doc,
        feasible=front.feasible,
        wall_time_s=time.perf_counter() - started,
    )


def _worker(payload: tuple) -> UtilityRunResult:
    utility_doc, utility_index, config_doc, lodf = payload
    graph = utility_from_document(utility_doc)
    config = run_config_from_document(config_doc, require_source=False)
    return run_one_utility(graph, utility_index, config, lodf)


def optimize_system(
    system: SystemModel, config: RunConfig
) -> list[UtilityRunResult]:
    """Run one NSGA-2 search per utility, in parallel up to config.parallelism."""
    config.validate_params()
    lodf = prepare_lodf(system)
    if config.parallelism == 1 or len(system.utilities) == 1:
        return [
            run_one_utility(u, i, config, lodf) for i, u in enumerate(system.utilities)
        ]
    payloads = [
        (utility_to_document(u), i, config.as_dict(), lodf)
        for i, u in enumerate(system.utilities)
    ]
    with ProcessPoolExecutor(max_workers=config.parallelism) as pool:
        results = list(pool.map(_worker, payloads))
    return results


# ---------------------------------------------------------------------------
# Result files


def dump_json(doc: Mapping) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_results(results: Sequence[UtilityRunResult], outdir: Union[str, Path]) -> list[Path]:
    """One deterministic result file per utility plus a timing sidecar."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for r in results:
        path = outdir / f"{r.utility_id}.result.json"
        path.write_text(dump_json(r.document), encoding="utf-8")
        paths.append(path)
    timing = {
        "note": "wall-clock timing; excluded from determinism guarantees",
        "utilities": {r.utility_id: r.wall_time_s for r in results},
        "total_s": sum(r.wall_time_s for r in results),
    }
    (outdir / "timing.json").write_text(dump_json(timing), encoding="utf-8")
    return paths


def load_result(path: Union[str, Path]) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != RESULT_FORMAT:
        raise ConfigError(f"{path}: not a {RESULT_FORMAT} document")
    return doc


def result_rows(doc: Mapping) -> list[SolutionRow]:
    return [
        SolutionRow(
            bits=s["bits"],
            n_sg=s["n_sg"],
            f1=s["objectives"]["f1"],
            f2=s["objectives"]["f2"],
            f3=s["objectives"]["f3"],
            f4=s["objectives"]["f4"],
        )
        for s in doc["solutions"]
    ]


@dataclass
class EmitOutcome:
    utility_id: str
    solution_index: int
    bits: str
    files: dict  # filename -> config text
    manifest: dict
    audit: dict


def emit_solution(result_doc: Mapping, selector: str) -> EmitOutcome:
    """Emit firewall configs for one solution of a result document.

    The CLI and the HTTP service both call this, so archives built from
    either surface carry identical contents and checksums.
    """
    graph = utility_from_document(result_doc["utility"])
    rows = result_rows(result_doc)
    if not rows:
        raise ConfigError(f"result for {graph.id!r} contains no solutions")
    idx = select_solution(rows, selector, tuple(result_doc["config"]["objectives"]))
    chromosome = Chromosome.from_string(rows[idx].bits)
    clustering = decompose(graph, chromosome)
    configs = emit_clustering(
        clustering, graph, utility_index=int(result_doc.get("utility_index", 0))
    )
    files, manifest = render_all(configs, graph.id)
    audit = audit_counts(configs, clustering)
    manifest["solution"] = {"index": idx, "bits": rows[idx].bits, "selector": selector}
    return EmitOutcome(
        utility_id=graph.id,
        solution_index=idx,
        bits=rows[idx].bits,
        files=files,
        manifest=manifest,
        audit=audit.as_dict(),
    )


def write_emission(outcome: EmitOutcome, outdir: Union[str, Path]) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for fname, text in outcome.files.items():
        path = outdir / fname
        path.write_text(text, encoding="utf-8")
        paths.append(path)
    manifest_path = outdir / "manifest.json"
    manifest_path.write_text(dump_json(outcome.manifest), encoding="utf-8")
    paths.append(manifest_path)
    audit_path = outdir / "audit.json"
    audit_path.write_text(dump_json(outcome.audit), encoding="utf-8")
    paths.append(audit_path)
    return paths


def result_to_summary(doc: Mapping, wall_time_s: Optional[float] = None) -> RunSummary:
    utility = doc["utility"]
    return RunSummary(
        utility_id=utility["id"],
        graph_nodes=len(utility["nodes"]),
        graph_edges=len(utility["edges"]),
        evaluations=doc["metadata"]["evaluations"],
        solutions=result_rows(doc),
        feasible=doc["feasible"],
        objectives=tuple(doc["config"]["objectives"]),
        computation_time_s=wall_time_s,
    )
