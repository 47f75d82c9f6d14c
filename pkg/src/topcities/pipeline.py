"""Stage orchestration: parse -> extract -> threshold -> geocode -> stats -> emit.

Each stage consumes and produces the documented text formats, so running the
stages separately through intermediate files gives byte-identical final
outputs to a single ``run``; ``run_pipeline`` chains the very same stage
functions through in-memory texts.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction

from . import addresses, emit, geocode, records, stats
from .config import ALL_FORMATS, DEFAULT_FILENAMES, PipelineConfig


class PipelineError(RuntimeError):
    pass


@dataclass
class RunReport:
    records_parsed: int = 0
    records_skipped: int = 0
    corpus_size: int = 0
    top_minimum: int = 0          # k
    threshold_citations: int = 0  # c
    top_size: int = 0             # T
    city_count: int = 0
    testable_count: int = 0
    significant_positive: int = 0
    significant_negative: int = 0
    geocode_failures: int = 0
    warnings: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)

    def summary(self) -> str:
        lines = [
            f"records parsed: {self.records_parsed} (skipped: {self.records_skipped})",
            f"corpus size: {self.corpus_size}",
            f"top set: minimum {self.top_minimum}, threshold {self.threshold_citations} "
            f"citations, size {self.top_size}",
            f"cities: {self.city_count} ({self.testable_count} testable, "
            f"{self.significant_positive} significantly above, "
            f"{self.significant_negative} significantly below)",
            f"geocoding failures: {self.geocode_failures}",
        ]
        lines.extend(f"wrote {path}" for path in self.outputs)
        return "\n".join(lines)


def _expand_inputs(paths) -> list[str]:
    expanded: list[str] = []
    for path in paths:
        if os.path.isdir(path):
            expanded.extend(
                os.path.join(path, name)
                for name in sorted(os.listdir(path))
                if name.endswith(".txt")
            )
        else:
            expanded.append(path)
    return expanded


def stage_parse(input_paths, doc_type: str = "Article") -> tuple[str, records.ParseDiagnostics]:
    """Parse and merge export files into a normalized corpus dump."""
    paths = _expand_inputs(input_paths)
    streams = []
    for path in paths:
        with open(path, "rb") as fh:
            streams.append(records.decode_export_bytes(fh.read()))
    corpus, diags = records.merge_exports(streams)
    if doc_type and doc_type.lower() != "all":
        corpus = [r for r in corpus if r.doc_type.lower() == doc_type.lower()]
    return records.write_corpus(corpus), diags


def write_geopoints(points: dict) -> str:
    lines = []
    for key in sorted(points, key=lambda k: k.sort_key()):
        p = points[key]
        lines.append(
            "\t".join(
                [
                    key.city,
                    key.region or "",
                    key.country,
                    repr(p.lat),
                    repr(p.lon),
                    p.source,
                    "true" if p.failed else "false",
                ]
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")


def read_geopoints(text: str) -> dict:
    points = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        city, region, country, lat, lon, source, failed = line.split("\t")
        key = addresses.CityKey(city=city, region=region or None, country=country)
        points[key] = geocode.GeoPoint(
            lat=float(lat), lon=float(lon), source=source, failed=failed == "true"
        )
    return points


def make_backend(config: PipelineConfig):
    if config.geocoder == "http":
        return geocode.HttpBackend(endpoint=config.endpoint)
    return geocode.GazetteerBackend(path=config.gazetteer)


def stage_geocode(corpus_text: str, config: PipelineConfig) -> tuple[str, list[str]]:
    """Resolve every city key of the corpus; returns the geopoints dump."""
    corpus = records.read_corpus(corpus_text)
    keys = set()
    for record in corpus:
        for occ in addresses.extract_occurrences(record):
            keys.add(occ.key)
    cache = geocode.GeoCache(config.cache) if config.cache else None
    backend = make_backend(config)
    points = geocode.resolve_all(keys, backend, cache=cache, pause=config.pause)
    warnings = list(cache.warnings) if cache else []
    warnings.extend(
        f"geocoding failed: {key.render()}"
        for key in sorted(points, key=lambda k: k.sort_key())
        if points[key].failed
    )
    return write_geopoints(points), warnings


def stage_stats(
    corpus_text: str, geopoints_text: str, config: PipelineConfig
) -> tuple[str, stats.ThresholdResult]:
    """Compute threshold, tallies, and the per-city statistics table."""
    corpus = records.read_corpus(corpus_text)
    if not corpus:
        raise PipelineError("empty corpus")
    threshold = stats.citation_threshold(
        [r.times_cited for r in corpus], stats.as_fraction(config.percentile)
    )
    top_ids = stats.classify_top(corpus, threshold)
    tallies = addresses.tally(corpus, top_ids, mode=config.count_mode)
    if not tallies:
        raise PipelineError("empty corpus")  # no record had an extractable address
    p_e = Fraction(threshold.T, threshold.N) if config.empirical_share else threshold.p
    points = read_geopoints(geopoints_text)
    rows = stats.city_table(
        tallies,
        p_e=p_e,
        alpha=stats.as_fraction(config.alpha),
        bonferroni=config.bonferroni,
        points=points,
    )
    return emit.emit_table(rows).text, threshold


def stage_map(table_text: str, config: PipelineConfig) -> dict[str, emit.OverlayDocument]:
    """Emit the overlay formats from a statistics table."""
    rows = emit.read_table(table_text)
    docs = {}
    for fmt in config.formats:
        if fmt == "gpsviz":
            docs[fmt] = emit.emit_gpsviz(rows)
        elif fmt == "geojson":
            docs[fmt] = emit.emit_geojson(rows)
        elif fmt == "table":
            docs[fmt] = emit.OverlayDocument("table", table_text, len(rows))
        elif fmt == "html":
            docs[fmt] = emit.emit_html(rows, title=config.title,
                                       background_url=config.background_url)
    return docs


def run_pipeline(config: PipelineConfig) -> RunReport:
    config.validate()
    report = RunReport()

    corpus_text, diags = stage_parse(config.inputs, doc_type=config.doc_type)
    report.records_parsed = diags.records_parsed
    report.records_skipped = diags.records_skipped
    report.warnings.extend(f"line {ln}: {msg}" for ln, msg in diags.warnings)
    if not corpus_text:
        raise PipelineError("empty corpus")

    geopoints_text, geo_warnings = stage_geocode(corpus_text, config)
    report.warnings.extend(geo_warnings)

    table_text, threshold = stage_stats(corpus_text, geopoints_text, config)
    report.corpus_size = threshold.N
    report.top_minimum = threshold.k
    report.threshold_citations = threshold.c
    report.top_size = threshold.T

    rows = emit.read_table(table_text)
    report.city_count = len(rows)
    report.testable_count = sum(1 for r in rows if r.testable)
    report.significant_positive = sum(1 for r in rows if r.significant and r.n_o > r.n_e)
    report.significant_negative = sum(1 for r in rows if r.significant and r.n_o < r.n_e)
    report.geocode_failures = sum(1 for r in rows if r.point.failed)

    docs = stage_map(table_text, config)
    os.makedirs(config.out_dir, exist_ok=True)
    for fmt in ALL_FORMATS:
        if fmt not in docs:
            continue
        path = os.path.join(config.out_dir, DEFAULT_FILENAMES[fmt])
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(docs[fmt].text)
        report.outputs.append(path)
    return report
