"""Command-line entry point: synthesize, optimize, emit, report, serve.

Exit codes: 0 success, 1 validation error, 2 infeasible optimization,
3 I/O failure. All commands are deterministic for identical inputs and
seeds, and never modify their input files.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from .grid_physics import GridError
from .orchestrate import (
    ConfigError,
    RunConfig,
    SynthSpec,
    dump_json,
    emit_solution,
    load_result,
    optimize_system,
    resolve_system,
    result_rows,
    result_to_summary,
    run_config_from_document,
    synthesize_system,
    write_emission,
    write_results,
)
from .reporting import compare_baselines, export_reports, resolve_picker
from .topology import TopologyError, load_topology, system_to_document

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INFEASIBLE = 2
EXIT_IO = 3


def fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (TopologyError, GridError, ConfigError) as exc:
            fail(str(exc), EXIT_VALIDATION)
        except ValueError as exc:
            fail(str(exc), EXIT_VALIDATION)
        except OSError as exc:
            fail(str(exc), EXIT_IO)

    return wrapper


@click.group()
@click.version_option(package_name="zoneopt")
def main():
    """Security-zone optimization and firewall generation for SCADA networks."""


@main.command()
@click.option("--utilities", default=1, show_default=True, help="Number of utilities.")
@click.option("--subs", type=int, required=True, help="Substations per utility.")
@click.option("--topology", "kind", type=click.Choice(["star", "hybrid"]), default="star",
              show_default=True)
@click.option("--edge-prob", default=0.15, show_default=True,
              help="Extra substation-link probability (hybrid only).")
@click.option("--seed", default=0, show_default=True)
@click.option("--grid/--no-grid", "with_grid", default=True, show_default=True,
              help="Attach a synthetic physical grid.")
@click.option("--out", "-o", type=click.Path(dir_okay=False), default="topology.json",
              show_default=True)
@handle_errors
def synth(utilities, subs, kind, edge_prob, seed, with_grid, out):
    """Write a synthetic topology document."""
    if subs is None or subs < 1:
        fail("--subs must be at least 1", EXIT_VALIDATION)
    spec = SynthSpec(
        subs=subs, utilities=utilities, topology=kind, edge_prob=edge_prob,
        seed=seed, grid=with_grid,
    )
    system = synthesize_system(spec)
    Path(out).write_text(dump_json(system_to_document(system)), encoding="utf-8")
    click.echo(f"wrote {out}: {len(system.utilities)} utilities, "
               f"{sum(len(u.nodes) for u in system.utilities)} nodes")


def _merge_run_config(config_path, topology, objectives, p_min, p_max, n_p_min,
                      weights, parallel, population, generations, offspring,
                      crossover_points, crossover_prob, mutation, seed) -> RunConfig:
    doc: dict = {}
    if config_path:
        with open(config_path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    if topology:
        doc["topology"] = topology
        doc.pop("synth", None)
    ga = dict(doc.get("ga", {}))
    for key, value in (
        ("population_size", population),
        ("max_generations", generations),
        ("offspring_size", offspring),
        ("crossover_points", crossover_points),
        ("crossover_prob", crossover_prob),
        ("seed", seed),
    ):
        if value is not None:
            ga[key] = value
    if mutation is not None:
        ga["mutation_prob"] = mutation if mutation == "1/dec_var" else float(mutation)
    doc["ga"] = ga
    if objectives:
        doc["objectives"] = [o.strip().upper() for o in objectives.split(",") if o.strip()]
    cons = dict(doc.get("constraints", {}))
    for key, value in (("p_min", p_min), ("p_max", p_max), ("n_p_min", n_p_min)):
        if value is not None:
            cons[key] = value
    doc["constraints"] = cons
    if weights:
        parts = [w.strip() for w in weights.split(",")]
        if len(parts) != 4:
            raise ConfigError("--weights needs four comma-separated values (iso,cb,xline,xfmr)")
        doc["weights"] = dict(zip(("iso", "cb", "xline", "xfmr"), map(float, parts)))
    if parallel is not None:
        doc["parallelism"] = parallel
    return run_config_from_document(doc)


@main.command()
@click.option("--topology", type=click.Path(exists=True, dir_okay=False),
              help="Topology document (overrides the config file).")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="Run-config JSON document.")
@click.option("--out", "-o", type=click.Path(file_okay=False), default="results",
              show_default=True)
@click.option("--objectives", help="Comma list, e.g. F1,F2,F3,F4.")
@click.option("--p-min", type=int, help="Minimum cluster count.")
@click.option("--p-max", type=int, help="Maximum cluster count.")
@click.option("--n-p-min", type=int, help="Minimum nodes per cluster.")
@click.option("--weights", help="Four comma-separated device weights.")
@click.option("--parallel", type=int, help="Per-utility parallel jobs.")
@click.option("--population", type=int, help="GA population size.")
@click.option("--generations", type=int, help="GA generations.")
@click.option("--offspring", type=int, help="GA offspring per generation.")
@click.option("--crossover-points", type=int)
@click.option("--crossover-prob", type=float)
@click.option("--mutation", help="Bit-flip probability or '1/dec_var'.")
@click.option("--seed", type=int, help="Master seed.")
@handle_errors
def optimize(topology, config_path, out, objectives, p_min, p_max, n_p_min, weights,
             parallel, population, generations, offspring, crossover_points,
             crossover_prob, mutation, seed):
    """Run one NSGA-2 search per utility and write result documents."""
    config = _merge_run_config(
        config_path, topology, objectives, p_min, p_max, n_p_min, weights, parallel,
        population, generations, offspring, crossover_points, crossover_prob,
        mutation, seed,
    )
    system = resolve_system(config)
    results = optimize_system(system, config)
    write_results(results, out)
    infeasible = [r.utility_id for r in results if not r.feasible]
    for r in results:
        n_sol = len(r.document["solutions"])
        status = "feasible" if r.feasible else "INFEASIBLE"
        click.echo(f"{r.utility_id}: {status}, {n_sol} solutions, "
                   f"{r.document['metadata']['evaluations']} evaluations")
    if infeasible:
        fail(f"no feasible front for: {', '.join(infeasible)}", EXIT_INFEASIBLE)
    click.echo(f"wrote {len(results)} result files to {out}")


@main.command()
@click.option("--result", "result_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="A result document from optimize.")
@click.option("--solution", default="min-cost", show_default=True,
              help="min-cost | max-resilience | knee | <index>.")
@click.option("--out", "-o", type=click.Path(file_okay=False), default="configs",
              show_default=True)
@handle_errors
def emit(result_path, solution, out):
    """Emit firewall configs for one chosen solution."""
    doc = load_result(result_path)
    outcome = emit_solution(doc, solution)
    write_emission(outcome, out)
    if not outcome.audit["ok"]:
        click.echo(json.dumps(outcome.audit, indent=2))
        fail("audit mismatch between emitted configs and analytic counts", EXIT_INFEASIBLE)
    click.echo(
        f"{outcome.utility_id}: solution {outcome.solution_index} -> "
        f"{len(outcome.files)} config files in {out} (audit clean)"
    )


@main.command()
@click.option("--results", "result_paths", type=click.Path(exists=True), multiple=True,
              required=True, help="Result files or directories containing them.")
@click.option("--topology", type=click.Path(exists=True, dir_okay=False),
              help="Topology document; enables the baseline comparison.")
@click.option("--picker", default="knee", show_default=True,
              type=click.Choice(["knee", "min-cost", "max-resilience"]))
@click.option("--out", "-o", type=click.Path(file_okay=False), default="reports",
              show_default=True)
@handle_errors
def report(result_paths, topology, picker, out):
    """Aggregate result documents into report tables."""
    files: list[Path] = []
    for p in result_paths:
        path = Path(p)
        if path.is_dir():
            files.extend(sorted(path.glob("*.result.json")))
        else:
            files.append(path)
    if not files:
        fail("no result documents found", EXIT_VALIDATION)
    docs = [load_result(f) for f in files]
    summaries = [result_to_summary(d) for d in docs]
    comparison = None
    if topology:
        system = load_topology(topology)
        fronts = {d["utility"]["id"]: result_rows(d) for d in docs}
        comparison = compare_baselines(system, fronts, resolve_picker(picker))
    written = export_reports(summaries, out, comparison=comparison)
    for path in written:
        click.echo(f"wrote {path}")


@main.command()
@click.option("--topology", type=click.Path(exists=True, dir_okay=False),
              help="Topology served at /topology and used for UI-launched runs.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--parallel", default=1, show_default=True,
              help="Per-utility parallel jobs inside each run.")
@click.option("--ui-dir", type=click.Path(file_okay=False),
              help="Static UI build to mount at /ui (auto-detected when omitted).")
@handle_errors
def serve(topology, host, port, parallel, ui_dir):
    """Start the HTTP service (and UI, when built)."""
    import uvicorn

    from .service.app import create_app

    app = create_app(topology_path=topology, parallelism=parallel, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
