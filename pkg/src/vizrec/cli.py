"""Command-line front door.  Machine output goes to stdout, logs to stderr;
exit code is nonzero on any error."""

from __future__ import annotations

import json
import logging
import os
import sys
from pathlib import Path

import click

from .bounds import QueryClassSpec, vc_dimension_bound
from .experiments import EXPERIMENTS
from .queries import Predicate, Visualization
from .recommend import ExplorationConfig, payload_bytes, recommendation_payload
from .tables import column_stats, load_schema_file, load_table

log = logging.getLogger("vizrec")


def _setup_logging() -> None:
    level = os.environ.get("VIZREC_LOG", "WARNING").upper()
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )


@click.group()
def main() -> None:
    """Statistically safe bar-chart recommendations."""
    _setup_logging()


def _load(csv_path: str, schema_path: str | None):
    schema = load_schema_file(schema_path) if schema_path else None
    try:
        return load_table(Path(csv_path), schema=schema, name=Path(csv_path).stem)
    except (OSError, ValueError) as exc:
        raise click.ClickException(f"cannot load {csv_path}: {exc}") from exc


@main.command()
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--schema", "schema_path", type=click.Path(exists=True), default=None,
              help="JSON file mapping column name to feature kind.")
def ingest(csv_path: str, schema_path: str | None) -> None:
    """Load a CSV and print its schema and per-column statistics."""
    table = _load(csv_path, schema_path)
    click.echo(f"table={table.name} n={table.n} columns={len(table.columns)}")
    for col in table.columns:
        distinct, lo, hi, nulls = column_stats(table, col.name)
        click.echo(
            f"  {col.name} kind={col.kind.value} distinct={distinct} "
            f"min={lo} max={hi} nulls={nulls}"
        )


@main.command()
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--reference", "reference_path", type=click.Path(exists=True), default=None,
              help="Predicate JSON for the reference visualization (default: all rows).")
@click.option("--group-by", required=True, help="Feature whose distribution is charted.")
@click.option("--delta", default=0.05, show_default=True, help="FWER target.")
@click.option("--eps-v", default=None, type=float, help="Extra practical-significance threshold.")
@click.option("--one-sample", is_flag=True, help="Treat the reference pmf as exact.")
@click.option("--vc-dimension", default=None, type=int,
              help="Declared class dimension (default: derived from the schema).")
@click.option("--schema", "schema_path", type=click.Path(exists=True), default=None)
def recommend(csv_path, reference_path, group_by, delta, eps_v, one_sample,
              vc_dimension, schema_path) -> None:
    """Print ranked safe recommendations as JSON."""
    table = _load(csv_path, schema_path)
    if reference_path:
        with open(reference_path) as f:
            predicate = Predicate.from_json(json.load(f))
    else:
        predicate = Predicate()
    config = ExplorationConfig(
        delta=delta, eps_v=eps_v, one_sample=one_sample, vc_dimension=vc_dimension
    )
    try:
        reference = Visualization(predicate, group_by, config.bucket_count)
        payload = recommendation_payload(reference, table, config)
    except (KeyError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    log.info("%d candidates, %d safe", payload["n_candidates"],
             len(payload["recommendations"]))
    click.echo(f"{len(payload['recommendations'])} safe recommendations", err=True)
    sys.stdout.buffer.write(payload_bytes(payload))
    sys.stdout.buffer.write(b"\n")


@main.command("vc-bound")
@click.option("--class", "class_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Query-class JSON: per-feature interval counts.")
def vc_bound(class_path: str) -> None:
    """Print the dimension bound for a declared query class."""
    with open(class_path) as f:
        spec = QueryClassSpec.from_json(json.load(f))
    try:
        click.echo(str(vc_dimension_bound(spec)))
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc


@main.group()
def experiment() -> None:
    """Seeded, reproducible experiment runners."""


@experiment.command("run")
@click.argument("name", type=click.Choice(sorted(EXPERIMENTS)))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_dir", default="experiments", show_default=True,
              type=click.Path(file_okay=False))
def experiment_run(name: str, seed: int, out_dir: str) -> None:
    """Run one experiment and write its JSON + CSV outputs."""
    result = EXPERIMENTS[name](seed=seed)
    json_path, csv_path = result.write(out_dir)
    click.echo(f"wrote {json_path}", err=True)
    click.echo(f"wrote {csv_path}", err=True)
    click.echo(json.dumps(result.summary, sort_keys=True))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8787, show_default=True, type=int)
def serve(host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
