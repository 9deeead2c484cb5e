"""Command-line interface: ingest, report, plot, serve.

Every subcommand drives the same library pipeline as the HTTP service, so
numbers printed here match ``/api/v1/report`` exactly.  Exit codes are
stable: 0 ok, 2 input or selection error, 3 duplicate run, 4 I/O error,
5 bind failure.  Data goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import csv as csv_module
import io
import socket
import sys
from dataclasses import dataclass
from pathlib import Path

import click

from .errors import (
    DuplicateRun,
    EmptyFile,
    ParseError,
    PipelineFailure,
    RiseError,
    StoreCorrupt,
    UnknownAttribute,
    UnknownEnvironment,
    UnknownRun,
    ValidationError,
)
from .indicators import DEFAULT_THRESHOLD, Analysis, IndicatorReport, Selection, analyze
from .plotting import render_svg
from .store import ENV_ALL, Store, parse_prediction_bytes

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DUPLICATE = 3
EXIT_IO = 4
EXIT_BIND = 5

INDICATOR_COLUMNS = ("Acc", "DP", "MD", "F_mean", "F_shift", "F_acc")


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
def main() -> None:
    """Sorted-residual fairness analysis for binary classifiers."""


@main.command()
@click.option("--store", "store_dir", required=True, type=click.Path(), help="store directory")
@click.option("--run", "run_id", required=True, help="unique run id")
@click.option("--dataset", required=True)
@click.option("--algorithm", required=True)
@click.option(
    "--attributes",
    default=None,
    help="comma-separated attribute names; must match the CSV header (default: from header)",
)
@click.argument("file", type=click.Path())
def ingest(store_dir, run_id, dataset, algorithm, attributes, file) -> None:
    """Validate FILE and register it as a run with precomputed metrics."""
    try:
        data = Path(file).read_bytes()
    except OSError as err:
        _fail(EXIT_IO, f"cannot read {file}: {err}")
    try:
        table = parse_prediction_bytes(data)
        if attributes is not None:
            declared = {a.strip() for a in attributes.split(",") if a.strip()}
            if declared != set(table.attribute_names):
                _fail(
                    EXIT_INPUT,
                    f"declared attributes {sorted(declared)} do not match "
                    f"file columns {sorted(table.attribute_names)}",
                )
        Store(store_dir).register_run(run_id, dataset, algorithm, table, data)
    except DuplicateRun as err:
        _fail(EXIT_DUPLICATE, str(err))
    except (ParseError, ValidationError, EmptyFile, StoreCorrupt) as err:
        _fail(EXIT_INPUT, str(err))
    click.echo(run_id)


@dataclass(frozen=True)
class _Row:
    run_id: str
    algorithm: str
    environment: str
    values: tuple[float | None, ...]
    notes: tuple[str, ...] = ()
    analysis: Analysis | None = None


def _report_row(run_id: str, algorithm: str, analysis: Analysis) -> _Row:
    report: IndicatorReport = analysis.report
    notes = []
    for name, value in (("DP", report.dp), ("F_shift", report.f_shift), ("F_acc", report.f_acc)):
        if not value.defined:
            notes.append(f"{run_id} {name} undefined: {value.reason}")
        elif getattr(value, "partial", False):
            notes.append(f"{run_id} {name} partial: {value.reason}")
    return _Row(
        run_id=run_id,
        algorithm=algorithm,
        environment=analysis.selection.environment,
        values=(
            report.acc,
            report.dp.value,
            report.md,
            report.f_mean,
            report.f_shift.value,
            report.f_acc.value,
        ),
        notes=tuple(notes),
        analysis=analysis,
    )


def _stored_row(store: Store, run_id: str, algorithm: str, attribute: str, env: str) -> _Row:
    for row in store.stored_indicators(run_id):
        if row["attribute"] == attribute and row["environment"] == env:
            return _Row(
                run_id=run_id,
                algorithm=algorithm,
                environment=env,
                values=tuple(row[k] for k in ("acc", "dp", "md", "f_mean", "f_shift", "f_acc")),
            )
    _fail(EXIT_INPUT, f"run {run_id!r} has no stored indicators for {attribute!r} / {env!r}")


def format_table(rows: list[_Row], show_env: bool) -> str:
    """Fixed-width table: algorithm label, then the six indicators at 3 decimals."""
    label_width = max(len("Algorithm"), *(len(r.algorithm) for r in rows))
    env_width = max(len("Env"), *(len(r.environment) for r in rows)) if show_env else 0
    widths = [max(len(h), 5) for h in INDICATOR_COLUMNS]

    def fmt(value: float | None, width: int) -> str:
        return ("n/a" if value is None else f"{value:.3f}").rjust(width)

    header = "Algorithm".ljust(label_width)
    if show_env:
        header += "  " + "Env".ljust(env_width)
    header += "".join("  " + h.rjust(w) for h, w in zip(INDICATOR_COLUMNS, widths))
    lines = [header]
    for row in rows:
        line = row.algorithm.ljust(label_width)
        if show_env:
            line += "  " + row.environment.ljust(env_width)
        line += "".join("  " + fmt(v, w) for v, w in zip(row.values, widths))
        lines.append(line)
    for row in rows:
        lines.extend(f"# {note}" for note in row.notes)
    return "\n".join(lines) + "\n"


def format_csv(rows: list[_Row]) -> str:
    """Full-precision delimited output, one row per selection."""
    buf = io.StringIO()
    writer = csv_module.writer(buf, lineterminator="\n")
    writer.writerow(
        ["run", "algorithm", "environment", "acc", "dp", "md", "f_mean", "f_shift", "f_acc"]
    )
    for row in rows:
        writer.writerow(
            [row.run_id, row.algorithm, row.environment]
            + ["" if v is None else repr(float(v)) for v in row.values]
        )
    return buf.getvalue()


def _analyze_selection(store: Store, selection: Selection, threshold: float) -> Analysis:
    try:
        records = store.load_selection(selection.run_id, selection.attribute, selection.environment)
        return analyze(selection, records, threshold=threshold)
    except (UnknownRun, UnknownAttribute, UnknownEnvironment, StoreCorrupt, PipelineFailure) as err:
        _fail(EXIT_INPUT, str(err))


@main.command()
@click.option("--store", "store_dir", required=True, type=click.Path())
@click.option("--run", "runs", multiple=True, required=True, help="run id (repeatable)")
@click.option("--attribute", required=True)
@click.option("--env", default=ENV_ALL, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["table", "csv"]), default="table")
@click.option("--split", is_flag=True, help="with --env all, print one row per environment")
@click.option("--stored", is_flag=True, help="render stored indicator rows instead of computing")
@click.option("--threshold", type=float, default=DEFAULT_THRESHOLD, show_default=True)
@click.option(
    "--figures",
    "figures_dir",
    type=click.Path(file_okay=False),
    default=None,
    help="also write one SVG figure per computed row into this directory",
)
def report(store_dir, runs, attribute, env, fmt, split, stored, threshold, figures_dir) -> None:
    """Print indicator rows (Acc, DP, MD, F_mean, F_shift, F_acc) per run."""
    if stored and figures_dir:
        _fail(EXIT_INPUT, "--figures needs computed reports; drop --stored")
    store = Store(store_dir)
    rows: list[_Row] = []
    for run_id in runs:
        try:
            manifest = store.get_run(run_id)
        except (UnknownRun, StoreCorrupt) as err:
            _fail(EXIT_INPUT, str(err))
        if attribute not in manifest.attribute_names:
            _fail(EXIT_INPUT, f"unknown attribute {attribute!r} for run {run_id!r}")
        environments = list(manifest.environments) if split and env == ENV_ALL else [env]
        for one_env in environments:
            if stored:
                rows.append(_stored_row(store, run_id, manifest.algorithm, attribute, one_env))
            else:
                selection = Selection(run_id, attribute, one_env)
                rows.append(
                    _report_row(run_id, manifest.algorithm, _analyze_selection(store, selection, threshold))
                )

    if figures_dir:
        out_dir = Path(figures_dir)
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            for row in rows:
                name = f"{row.run_id}-{attribute}-{row.environment}.svg"
                (out_dir / name).write_bytes(render_svg(row.analysis))
        except OSError as err:
            _fail(EXIT_IO, f"cannot write figures to {figures_dir}: {err}")

    output = format_table(rows, show_env=split) if fmt == "table" else format_csv(rows)
    click.echo(output, nl=False)


@main.command()
@click.option("--store", "store_dir", required=True, type=click.Path())
@click.option("--run", "run_id", required=True)
@click.option("--attribute", required=True)
@click.option("--env", default=ENV_ALL, show_default=True)
@click.option("--threshold", type=float, default=DEFAULT_THRESHOLD, show_default=True)
@click.option("-o", "--output", required=True, type=click.Path())
def plot(store_dir, run_id, attribute, env, threshold, output) -> None:
    """Render the sorted-residual view for one selection to a deterministic SVG."""
    store = Store(store_dir)
    analysis = _analyze_selection(store, Selection(run_id, attribute, env), threshold)
    data = render_svg(analysis)
    try:
        Path(output).write_bytes(data)
    except OSError as err:
        _fail(EXIT_IO, f"cannot write {output}: {err}")
    click.echo(f"wrote {output}")


@main.command()
@click.option(
    "--store",
    "--store-dir",
    "store_dir",
    envvar="RISE_STORE_DIR",
    type=click.Path(),
    help="store directory (falls back to $RISE_STORE_DIR)",
)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--ui-dir", default=None, type=click.Path(), help="built web client to serve at /")
def serve(store_dir, host, port, ui_dir) -> None:
    """Run the HTTP service over a store until interrupted."""
    if not store_dir:
        _fail(EXIT_INPUT, "no store directory (use --store or $RISE_STORE_DIR)")
    if not Path(store_dir).is_dir():
        _fail(EXIT_INPUT, f"store directory {store_dir!r} does not exist")

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        probe.bind((host, port))
    except OSError as err:
        _fail(EXIT_BIND, f"cannot bind {host}:{port}: {err}")
    finally:
        probe.close()

    import uvicorn

    from .service import create_app

    click.echo(f"serving store {store_dir} at http://{host}:{port}")
    uvicorn.run(create_app(store_dir, ui_dir), host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
