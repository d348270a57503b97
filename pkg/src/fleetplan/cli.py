"""Command line front: validate, compile, plan, benchmark, serve.

Exit codes: 0 success, 2 validation failure, 3 infeasible problem.
"""
from __future__ import annotations

import json
import sys

import click

from .benchmark import format_report, run_benchmark
from .chronicles import problem_from_json, problem_to_json, validate_problem
from .domain import ModelVariant, compile, load_mission
from .pipeline import simplified_to_json, simplify
from .solver import SolveConfig, plan_to_json, solve
from .validator import validate_plan

EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3


def _load_problem(path: str, variant: str | None):
    """Accepts either a mission file or a compiled problem file."""
    with open(path) as fh:
        data = json.load(fh)
    if "locations" in data:
        mission = load_mission(path)
        v = ModelVariant.from_label(variant) if variant else None
        return compile(mission, v)
    if variant:
        raise click.UsageError(
            "--variant applies to mission files, not compiled problems")
    return problem_from_json(data)


@click.group()
def main():
    """Chronicle planner and mission control for mixed robot fleets."""


@main.command()
@click.argument("path", type=click.Path(exists=True))
@click.option("--variant", "-v", default=None, help="natural or optimized")
def validate(path, variant):
    """Check a mission or problem file for well-formedness."""
    try:
        problem = _load_problem(path, variant)
    except Exception as exc:  # noqa: BLE001 - report and flag, don't crash
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    violations = validate_problem(problem)
    for v in violations:
        click.echo(v, err=True)
    if violations:
        sys.exit(EXIT_VALIDATION)
    click.echo("ok")


@main.command("compile")
@click.argument("path", type=click.Path(exists=True))
@click.option("--variant", "-v", default=None, help="natural or optimized")
@click.option("--output", "-o", type=click.Path(), default=None)
def compile_cmd(path, variant, output):
    """Compile a mission file into a planning problem."""
    mission = load_mission(path)
    v = ModelVariant.from_label(variant) if variant else None
    problem = compile(mission, v)
    violations = validate_problem(problem)
    if violations:
        for item in violations:
            click.echo(item, err=True)
        sys.exit(EXIT_VALIDATION)
    text = json.dumps(problem_to_json(problem), indent=2)
    if output:
        with open(output, "w") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)


@main.command()
@click.argument("path", type=click.Path(exists=True))
@click.option("--variant", "-v", default=None, help="natural or optimized")
@click.option("--depth", type=int, default=None)
@click.option("--time-budget", type=float, default=120.0)
@click.option("--first", is_flag=True, help="stop at the first feasible plan")
@click.option("--output", "-o", type=click.Path(), default=None)
def plan(path, variant, depth, time_budget, first, output):
    """Solve a mission or problem file and print the plan."""
    try:
        problem = _load_problem(path, variant)
    except Exception as exc:  # noqa: BLE001
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    violations = validate_problem(problem)
    if violations:
        for item in violations:
            click.echo(item, err=True)
        sys.exit(EXIT_VALIDATION)
    result = solve(problem, SolveConfig(depth=depth, optimal=not first,
                                        time_budget=time_budget))
    if not result.found:
        click.echo(f"no plan: {result.status}", err=True)
        sys.exit(EXIT_INFEASIBLE)
    bad = validate_plan(problem, result)
    if bad:
        for item in bad:
            click.echo(item, err=True)
        sys.exit(EXIT_VALIDATION)
    payload = plan_to_json(result)
    payload["simplified"] = simplified_to_json(simplify(result))
    text = json.dumps(payload, indent=2)
    if output:
        with open(output, "w") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)


@main.command()
@click.option("--steps", default="1,2,3")
@click.option("--repetitions", type=int, default=3)
@click.option("--time-budget", type=float, default=120.0)
def benchmark(steps, repetitions, time_budget):
    """Time the natural and optimized models on the demo mission."""
    step_list = tuple(int(s) for s in steps.split(",") if s)
    report = run_benchmark(steps=step_list, repetitions=repetitions,
                           time_budget=time_budget)
    click.echo(format_report(report))


@main.command()
@click.argument("path", type=click.Path(exists=True))
@click.option("--addr", default=None, help="host:port to bind")
@click.option("--data-dir", default=None, help="event log directory")
@click.option("--threshold", type=float, default=None,
              help="detection clustering threshold")
def serve(path, addr, data_dir, threshold):
    """Run the mission-control HTTP service for a mission file."""
    from .service.app import serve as run_server

    mission = load_mission(path)
    run_server(mission, addr=addr, data_dir=data_dir,
               cluster_threshold=threshold)


if __name__ == "__main__":
    main()
