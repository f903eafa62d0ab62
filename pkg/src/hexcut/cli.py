"""Command-line client for the cut-cell engine.

Every subcommand is a thin wrapper over :mod:`hexcut.jobs`: parse flags,
load and validate a JSON job where one is expected, run, serialize.  Exit
codes are taken from the error hierarchy: 0 success, 2 invalid input,
3 numeric degeneracy, 4 I/O failure.
"""

from __future__ import annotations

import functools
import io
import json
import sys
from pathlib import Path

import click
from pydantic import ValidationError

from . import __version__
from .errors import HexcutError, InputError, OutputError
from .jobs import run_compare, run_cut, run_npac, run_shell
from .schemas import CompareJob, CutJob, NpacJob, RuleConfigSpec, ShellJob
from .vtkio import export_mesh

WORKERS_ENV = "HEXCUT_WORKERS"


def _guard(fn):
    """Translate package errors into the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ValidationError as exc:
            click.echo(f"error: invalid job: {exc}", err=True)
            raise SystemExit(InputError.exit_code)
        except HexcutError as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(exc.exit_code)

    return wrapper


def _load_job(path: str, model):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OutputError(f"cannot read job file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"job file {path} is not valid JSON: {exc}") from exc
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        raise InputError(f"job file {path} failed validation:\n{exc}") from exc


def _apply_overrides(job, rule, decider, workers):
    """Re-validate the job with CLI overrides folded in."""
    if rule is None and decider is None and workers is None:
        return job
    data = job.model_dump()
    if rule is not None:
        data["rule_config"]["rule"] = rule
    if decider is not None:
        data["rule_config"]["decider"] = decider
    if workers is not None:
        data["workers"] = workers
    try:
        return type(job).model_validate(data)
    except ValidationError as exc:
        raise InputError(f"override produced an invalid job:\n{exc}") from exc


def _write_text(path: str, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def _emit(text: str, out: str | None) -> None:
    if out is None:
        click.echo(text)
    else:
        _write_text(out, text if text.endswith("\n") else text + "\n")


_workers_option = click.option(
    "--workers",
    type=click.IntRange(min=1),
    default=None,
    envvar=WORKERS_ENV,
    help=f"Worker processes for the decomposition (env {WORKERS_ENV}).",
)


@click.group()
@click.version_option(version=__version__, prog_name="hexcut")
def main() -> None:
    """Cut-cell tetrahedral decomposition of level-set fields."""


@main.command()
@click.argument("jobfile", type=str)
@click.option("--rule", default=None, help="Override the resolution rule in the job.")
@click.option("--decider", type=click.Choice(["classical", "paper"]), default=None,
              help="Override the saddle decider variant.")
@_workers_option
@click.option("--seed", type=int, default=None,
              help="Override the seed of a random-preset field.")
@click.option("--out", "out", type=str, default=None,
              help="Mesh file path (format mesh) or report path (format json).")
@click.option("--format", "fmt", type=click.Choice(["mesh", "json"]), default="mesh",
              help="mesh: write grid to --out and print the report; json: report only.")
@_guard
def cut(jobfile, rule, decider, workers, seed, out, fmt) -> None:
    """Decompose one field and resolve ambiguous tets."""
    job = _apply_overrides(_load_job(jobfile, CutJob), rule, decider, workers)
    if fmt == "mesh" and out is None:
        raise InputError("--format mesh needs --out for the grid file")

    result = run_cut(job, seed_override=seed)
    report = {
        "resolution_report": result.resolution.report.to_dict(),
        "geometry_report": result.geometry.to_dict(),
        "iteration_reports": list(result.iteration_reports),
    }
    report_text = json.dumps(report, indent=2)

    if fmt == "mesh":
        buf = io.StringIO()
        export_mesh(result.resolution, buf)
        _write_text(out, buf.getvalue())
        click.echo(report_text)
    else:
        _emit(report_text, out)


@main.command()
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--out", "out", type=str, default=None, help="Write output here instead of stdout.")
@_guard
def npac(fmt, out) -> None:
    """Print the sign-pattern class atlas for the unit cell."""
    resp = run_npac(NpacJob())
    if fmt == "json":
        _emit(resp.model_dump_json(indent=2), out)
        return
    lines = ["representative,orbit_size,crossings,n_at,n_iat,n_bat"]
    for row in resp.classes:
        lines.append(
            f"{row.representative},{row.orbit_size},{row.crossings},"
            f"{row.n_at},{row.n_iat},{row.n_bat}"
        )
    _emit("\n".join(lines), out)


def _parse_radii(ctx, param, value):
    if value is None:
        return None
    try:
        radii = tuple(float(part) for part in value.split(","))
    except ValueError:
        raise click.BadParameter(f"expected comma-separated floats, got {value!r}")
    if not radii:
        raise click.BadParameter("need at least one radius")
    return radii


@main.command()
@click.option("--job", "jobfile", type=str, default=None,
              help="JSON job file; alternative to the direct flags.")
@click.option("--preset", type=click.Choice(["octant", "full"]), default="octant")
@click.option("--inner", type=float, default=None, help="Inner shell radius.")
@click.option("--outer", callback=_parse_radii, default=None,
              help="Comma-separated outer radii, one study row each.")
@click.option("--rule", default="G1_void", help="Resolution rule for every row.")
@click.option("--decider", type=click.Choice(["classical", "paper"]), default="classical")
@_workers_option
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--out", "out", type=str, default=None, help="Write output here instead of stdout.")
@_guard
def shell(jobfile, preset, inner, outer, rule, decider, workers, fmt, out) -> None:
    """Sweep spherical shells of varying thickness and report volumes."""
    if jobfile is not None:
        if inner is not None or outer is not None:
            raise InputError("--job excludes --inner/--outer")
        job = _load_job(jobfile, ShellJob)
        if workers is not None:
            job = job.model_copy(update={"workers": workers})
    else:
        if inner is None or outer is None:
            raise InputError("shell needs either --job or both --inner and --outer")
        job = ShellJob(
            preset=preset,
            inner_radius=inner,
            outer_radii=outer,
            rule_config=RuleConfigSpec(rule=rule, decider=decider),
            workers=workers or 1,
        )
    _, resp = run_shell(job)
    if fmt == "csv":
        _emit(resp.csv, out)
    else:
        _emit(resp.model_dump_json(indent=2), out)


@main.command()
@click.argument("jobfile", type=str)
@click.option("--rules", default=None,
              help="Comma-separated rule names overriding the job's list.")
@click.option("--decider", type=click.Choice(["classical", "paper"]), default=None)
@_workers_option
@click.option("--out", "out", type=str, default=None, help="Write output here instead of stdout.")
@_guard
def compare(jobfile, rules, decider, workers, out) -> None:
    """Resolve one field under several rules and diff the results."""
    job = _load_job(jobfile, CompareJob)
    data = job.model_dump()
    if rules is not None:
        data["rules"] = tuple(part.strip() for part in rules.split(","))
    if decider is not None:
        data["decider"] = decider
    if workers is not None:
        data["workers"] = workers
    try:
        job = CompareJob.model_validate(data)
    except ValidationError as exc:
        raise InputError(f"override produced an invalid job:\n{exc}") from exc
    resp = run_compare(job)
    _emit(resp.model_dump_json(indent=2), out)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@_guard
def serve(host, port) -> None:
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("hexcut.service:app", host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
