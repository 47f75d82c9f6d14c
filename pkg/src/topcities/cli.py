"""Command-line interface: parse, geocode, stats, map, and run subcommands."""

from __future__ import annotations

import os
import sys

import click

from .config import (
    DEFAULT_FILENAMES,
    ConfigError,
    PipelineConfig,
    build_config,
    parse_config_file,
)
from .pipeline import (
    PipelineError,
    run_pipeline,
    stage_geocode,
    stage_map,
    stage_parse,
    stage_stats,
)

_GEOCODER_OPTIONS = [
    click.option("--geocoder", type=click.Choice(["gazetteer", "http"]), default=None,
                 help="Geocoding backend (default: gazetteer)."),
    click.option("--gazetteer", type=click.Path(exists=True), default=None,
                 help="Gazetteer file (default: bundled)."),
    click.option("--endpoint", default=None, help="HTTP geocoder endpoint URL."),
    click.option("--cache", type=click.Path(), default=None, help="Persistent geocode cache file."),
]

_STATS_OPTIONS = [
    click.option("--percentile", type=float, default=None,
                 help="Excellence percentile fraction (default: 0.10)."),
    click.option("--alpha", type=float, default=None, help="Significance level (default: 0.05)."),
    click.option("--bonferroni/--no-bonferroni", default=None,
                 help="Divide alpha by the number of testable cities."),
    click.option("--empirical-share/--no-empirical-share", default=None,
                 help="Use the tie-inflated top share T/N instead of the nominal percentile."),
    click.option("--count-mode", type=click.Choice(["paper", "occurrence"]), default=None,
                 help="Per-city counting mode (default: paper)."),
]

_MAP_OPTIONS = [
    click.option("--out", "out_dir", type=click.Path(), default=None,
                 help="Output directory (default: current)."),
    click.option("--formats", default=None,
                 help="Comma-separated subset of gpsviz,geojson,table,html."),
    click.option("--title", default=None, help="HTML map title."),
    click.option("--background-url", default=None,
                 help="Equirectangular background image URL for the HTML map."),
]


def _add_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn
    return wrap


def _config_from(config_path, **cli_values) -> PipelineConfig:
    file_values = parse_config_file(config_path) if config_path else None
    if isinstance(cli_values.get("formats"), str):
        cli_values["formats"] = [f.strip() for f in cli_values["formats"].split(",") if f.strip()]
    return build_config(file_values, **cli_values)


def _fail(message: str, code: int = 1):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
def main():
    """Map cities that publish more top-cited papers than statistically expected."""


@main.command()
@click.argument("inputs", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("-o", "--output", type=click.Path(), required=True, help="Corpus dump file.")
@click.option("--doc-type", default=None, help='Document-type filter (default: Article; "all" disables).')
def parse(inputs, output, doc_type):
    """Parse export files into the normalized corpus dump."""
    corpus_text, diags = stage_parse(list(inputs), doc_type=doc_type or "Article")
    with open(output, "w", encoding="utf-8", newline="") as fh:
        fh.write(corpus_text)
    for lineno, message in diags.warnings:
        click.echo(f"warning: line {lineno}: {message}", err=True)
    click.echo(f"parsed {diags.records_parsed} records (skipped {diags.records_skipped})")


@main.command()
@click.argument("corpus", type=click.Path(exists=True))
@click.option("-o", "--output", type=click.Path(), required=True, help="Geopoints file.")
@_add_options(_GEOCODER_OPTIONS)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def geocode(corpus, output, config_path, **cli_values):
    """Resolve corpus cities to coordinates."""
    try:
        config = _config_from(config_path, **cli_values)
    except ConfigError as exc:
        _fail(str(exc), code=2)
    with open(corpus, encoding="utf-8") as fh:
        corpus_text = fh.read()
    geopoints_text, warnings = stage_geocode(corpus_text, config)
    with open(output, "w", encoding="utf-8", newline="") as fh:
        fh.write(geopoints_text)
    for message in warnings:
        click.echo(f"warning: {message}", err=True)


@main.command()
@click.argument("corpus", type=click.Path(exists=True))
@click.argument("geopoints", type=click.Path(exists=True))
@click.option("-o", "--output", type=click.Path(), required=True, help="Statistics table (CSV).")
@_add_options(_STATS_OPTIONS)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def stats(corpus, geopoints, output, config_path, **cli_values):
    """Compute the per-city statistics table."""
    try:
        config = _config_from(config_path, **cli_values)
    except ConfigError as exc:
        _fail(str(exc), code=2)
    with open(corpus, encoding="utf-8") as fh:
        corpus_text = fh.read()
    with open(geopoints, encoding="utf-8") as fh:
        geopoints_text = fh.read()
    try:
        table_text, threshold = stage_stats(corpus_text, geopoints_text, config)
    except (PipelineError, ValueError) as exc:
        _fail(str(exc))
    with open(output, "w", encoding="utf-8", newline="") as fh:
        fh.write(table_text)
    click.echo(
        f"N={threshold.N} top set: minimum {threshold.k}, "
        f"threshold {threshold.c} citations, size {threshold.T}"
    )


@main.command("map")
@click.argument("table", type=click.Path(exists=True))
@_add_options(_MAP_OPTIONS)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def map_cmd(table, config_path, **cli_values):
    """Emit overlay files (ztest.txt, GeoJSON, HTML) from a statistics table."""
    try:
        config = _config_from(config_path, **cli_values)
    except ConfigError as exc:
        _fail(str(exc), code=2)
    with open(table, encoding="utf-8") as fh:
        table_text = fh.read()
    docs = stage_map(table_text, config)
    os.makedirs(config.out_dir, exist_ok=True)
    for fmt, doc in docs.items():
        path = os.path.join(config.out_dir, DEFAULT_FILENAMES[fmt])
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(doc.text)
        click.echo(f"wrote {path}")


@main.command()
@click.argument("inputs", nargs=-1, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="key = value config file.")
@click.option("--doc-type", default=None)
@_add_options(_STATS_OPTIONS)
@_add_options(_GEOCODER_OPTIONS)
@_add_options(_MAP_OPTIONS)
def run(inputs, config_path, **cli_values):
    """Run the whole pipeline and write all enabled outputs."""
    if inputs:
        cli_values["inputs"] = list(inputs)
    try:
        config = _config_from(config_path, **cli_values)
    except ConfigError as exc:
        _fail(str(exc), code=2)
    if not config.inputs:
        _fail("no input files given", code=2)
    try:
        report = run_pipeline(config)
    except PipelineError as exc:
        _fail(str(exc))
    except FileNotFoundError as exc:
        _fail(str(exc))
    for message in report.warnings:
        click.echo(f"warning: {message}", err=True)
    click.echo(report.summary())


if __name__ == "__main__":
    main()
