"""End-to-end pipeline: staged execution, report rendering, run manifest.

All report files are rendered in memory and written together at the end, so
a failing stage leaves no partial output behind. Every float is printed with
12 significant digits and CSV rows use bare newlines, which keeps repeated
runs byte-identical; `manifest.json` is the only file with volatile content
(timestamps and stage durations).
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from . import __version__
from .config import ConfigError, PipelineConfig, validate_config
from .corpus import (
    Corpus,
    IngestError,
    IngestionSummary,
    IntervalAssignment,
    IntervalScheme,
    assign_intervals,
    ingest_corpus,
)
from .embeddings import EmbeddingError, EmbeddingProvider, HttpEmbeddingClient, JsonlVectorStore
from .evolution import (
    CategoryAnnotation,
    CoverageReport,
    EvolutionError,
    EvolutionTrace,
    build_traces,
    category_coverage,
    load_annotations,
    pattern_flags,
    query_conversions,
    query_new_emergers,
)
from .extract import ExtractionError, KeywordScore, KeywordSet, extract_keywords
from .graph import (
    BipartiteGraph,
    GraphError,
    Partition,
    build_bipartite,
    degree_distribution,
    filter_min_degree,
    louvain_detect,
)
from .signals import (
    FrequencyTable,
    PortfolioMap,
    ScoreMatrix,
    SignalError,
    SignalLabel,
    SignalTable,
    build_signal_table,
    compute_score,
    count_frequencies,
)
from .text import Stopwords, load_stopwords, make_stemmer

logger = logging.getLogger(__name__)

STAGE_SETS = {
    "ingest": ("ingest",),
    "extract": ("ingest", "extract"),
    "signals": ("ingest", "extract", "signals"),
    "evolve": ("ingest", "extract", "signals", "evolve"),
    "graph": ("ingest", "extract", "graph"),
    "run": ("ingest", "extract", "signals", "evolve", "graph"),
}


class StageError(Exception):
    """A pipeline stage failed after inputs were read successfully."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"stage {stage}: {message}")
        self.stage = stage


def fmt_float(x: float) -> str:
    return format(float(x), ".12g")


def _csv_bytes(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue().encode("utf-8")


def _json_bytes(payload: Any) -> bytes:
    return (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode("utf-8")


@dataclass
class PipelineResult:
    """Everything a run computed, keyed by how far the stage list went."""

    config: PipelineConfig
    stages: tuple[str, ...]
    corpus: Corpus | None = None
    summary: IngestionSummary | None = None
    assignment: IntervalAssignment | None = None
    selections: dict[int, list[KeywordScore]] | None = None
    keyword_set: KeywordSet | None = None
    frequency: FrequencyTable | None = None
    visibility: ScoreMatrix | None = None
    diffusion: ScoreMatrix | None = None
    signal_table: SignalTable | None = None
    maps: dict[tuple[str, int], PortfolioMap] | None = None
    traces: tuple[EvolutionTrace, ...] | None = None
    conversions: list[tuple[str, int, int]] | None = None
    emergers: dict[int, list[str]] | None = None
    annotations: dict[str, CategoryAnnotation] | None = None
    coverage: CoverageReport | None = None
    graph: BipartiteGraph | None = None
    degree_histogram: dict[int, int] | None = None
    partition: Partition | None = None
    files: dict[str, bytes] = field(default_factory=dict)
    manifest: dict[str, Any] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)


def _input_hash(cfg: PipelineConfig, corpus: Corpus | None) -> str:
    digest = hashlib.sha256()
    if corpus is not None:
        for rec in corpus.records:
            digest.update(f"{rec.id}\x1f{rec.title}\x1f{rec.abstract}\x1f{rec.year}\n".encode("utf-8"))
        return digest.hexdigest()
    for path in cfg.inputs:
        try:
            digest.update(Path(path).read_bytes())
        except OSError as exc:
            raise IngestError(f"cannot read input {path}: {exc}") from exc
    return digest.hexdigest()


def _load_provider(cfg: PipelineConfig) -> EmbeddingProvider | None:
    if cfg.extractor != "embedding":
        return None
    if cfg.vectors_path:
        return JsonlVectorStore(cfg.vectors_path)
    url = cfg.resolved_embed_url()
    if url:
        return HttpEmbeddingClient(url, batch_size=cfg.embed_batch_size)
    raise ConfigError("embedding extractor configured without a provider")


def execute(
    cfg: PipelineConfig,
    command: str = "run",
    corpus: Corpus | None = None,
    provider: EmbeddingProvider | None = None,
) -> PipelineResult:
    """Run the requested stages and render their report files in memory.

    Raises ConfigError for bad configuration, IngestError when an input file
    cannot be read or parsed, and StageError for failures inside a stage.
    """
    if command not in STAGE_SETS:
        raise ConfigError(f"unknown command {command!r}")
    stages = STAGE_SETS[command]
    if command == "run" and not cfg.include_graph:
        stages = tuple(s for s in stages if s != "graph")
    problems = validate_config(
        cfg,
        require_inputs=corpus is None,
        require_embedding_source=provider is None,
    )
    if problems:
        raise ConfigError("; ".join(problems))
    scheme = cfg.scheme()
    stemmer = make_stemmer(cfg.stemmer)

    # Input phase: every user-supplied file is opened here so that read or
    # parse failures are distinguishable from downstream stage failures.
    try:
        stopwords = load_stopwords(cfg.stopwords_path, stemmer) if cfg.stopwords_path else Stopwords.default(stemmer)
    except OSError as exc:
        raise IngestError(f"cannot read stopwords {cfg.stopwords_path}: {exc}") from exc
    annotations: dict[str, CategoryAnnotation] | None = None
    if cfg.annotations_path and ("evolve" in stages):
        try:
            annotations = load_annotations(cfg.annotations_path, stemmer)
        except EvolutionError as exc:
            raise IngestError(str(exc)) from exc
    if provider is None and "extract" in stages:
        try:
            provider = _load_provider(cfg)
        except EmbeddingError as exc:
            raise IngestError(str(exc)) from exc

    result = PipelineResult(config=cfg, stages=stages)
    files = result.files

    clock = time.perf_counter
    started = clock()
    if corpus is None:
        corpus, summary = ingest_corpus(cfg.inputs, fmt=cfg.input_format)
    else:
        summary = IngestionSummary(
            raw=len(corpus), retained=len(corpus), deduplicated=0, rejected=0
        )
    assignment = assign_intervals(corpus, scheme)
    result.corpus, result.summary, result.assignment = corpus, summary, assignment
    result.timings["ingest"] = clock() - started
    result.counts["ingest"] = len(corpus)

    files["ingest_summary.json"] = _json_bytes(summary.as_json(assignment.out_of_range))
    files["corpus.csv"] = _csv_bytes(
        ("id", "title", "abstract", "year"),
        [(rec.id, rec.title, rec.abstract, rec.year) for rec in corpus.records],
    )
    files["annual_counts.csv"] = _csv_bytes(
        ("year", "count"), sorted(corpus.annual_counts().items())
    )

    if "extract" in stages:
        started = clock()
        try:
            selections, keyword_set = extract_keywords(
                corpus,
                assignment,
                extractor=cfg.extractor,
                k=cfg.top_k,
                max_n=cfg.max_n,
                stopwords=stopwords,
                stemmer=stemmer,
                provider=provider,
            )
        except (EmbeddingError, ExtractionError) as exc:
            raise StageError("extract", str(exc)) from exc
        result.selections, result.keyword_set = selections, keyword_set
        result.timings["extract"] = clock() - started
        result.counts["extract"] = len(keyword_set)
        rows = []
        for j in sorted(selections):
            for score in selections[j]:
                rows.append(
                    (
                        scheme.interval_label(j),
                        score.rank,
                        score.stem,
                        score.surface,
                        fmt_float(score.score),
                        score.candidate.occurrences,
                    )
                )
        files["keywords.csv"] = _csv_bytes(
            ("interval", "rank", "keyword", "surface", "score", "occurrences"), rows
        )

    if "signals" in stages:
        started = clock()
        try:
            frequency = count_frequencies(corpus, assignment, result.keyword_set, stemmer)
            visibility = compute_score(frequency, "kem", w=cfg.time_weight)
            diffusion = compute_score(frequency, "kim", w=cfg.time_weight)
            table, maps = build_signal_table(
                frequency,
                visibility,
                diffusion,
                scheme,
                epsilon=cfg.epsilon,
                normalize_x=cfg.normalize_x,
            )
        except SignalError as exc:
            raise StageError("signals", str(exc)) from exc
        result.frequency, result.visibility, result.diffusion = frequency, visibility, diffusion
        result.signal_table, result.maps = table, maps
        result.timings["signals"] = clock() - started
        result.counts["signals"] = sum(len(p.entries) for p in table)
        for (kind, period), pmap in sorted(maps.items()):
            files[f"map_{kind}_p{period}.csv"] = _csv_bytes(
                ("keyword", "x", "y", "quadrant"),
                [
                    (pt.keyword, fmt_float(pt.x), fmt_float(pt.y), pt.quadrant.value)
                    for pt in sorted(pmap.points, key=lambda pt: pt.keyword)
                ],
            )
        signal_rows = []
        for p in table:
            for stem in sorted(p.entries):
                e = p.entries[stem]
                signal_rows.append(
                    (
                        p.period,
                        e.keyword,
                        e.label.value,
                        fmt_float(e.kem_x),
                        fmt_float(e.kem_y),
                        fmt_float(e.kim_x),
                        fmt_float(e.kim_y),
                    )
                )
        files["signals.csv"] = _csv_bytes(
            ("period", "keyword", "label", "kem_x", "kem_y", "kim_x", "kim_y"),
            signal_rows,
        )

    if "evolve" in stages:
        started = clock()
        try:
            traces = build_traces(result.signal_table)
            conversions = query_conversions(traces)
            emergers = {
                target: query_new_emergers(traces, target)
                for target in range(2, scheme.period_count + 1)
            }
            coverage = category_coverage(result.signal_table, annotations) if annotations else None
        except EvolutionError as exc:
            raise StageError("evolve", str(exc)) from exc
        result.traces, result.conversions = traces, conversions
        result.emergers, result.annotations, result.coverage = emergers, annotations, coverage
        result.timings["evolve"] = clock() - started
        result.counts["evolve"] = len(traces)
        label_cols = [f"label_P{p.period}" for p in result.signal_table]
        files["evolution.csv"] = _csv_bytes(
            ["keyword", *label_cols, "pattern_flags"],
            [
                (t.keyword, *[x.value for x in t.labels], pattern_flags(t))
                for t in traces
            ],
        )
        files["conversions.csv"] = _csv_bytes(
            ("keyword", "from_period", "to_period"), sorted(conversions)
        )
        files["emergers.csv"] = _csv_bytes(
            ("target_period", "keyword"),
            [(t, kw) for t in sorted(emergers) for kw in sorted(emergers[t])],
        )
        if coverage is not None:
            files["coverage.csv"] = _csv_bytes(
                ("period", "kind", "category", "percent"),
                [
                    (cell.period, cell.kind, category, fmt_float(percent))
                    for cell in coverage.cells
                    for category, percent in cell.percentages.items()
                ],
            )
            files["coverage.json"] = _json_bytes(
                [
                    {
                        "period": cell.period,
                        "kind": cell.kind,
                        "counts": cell.counts,
                        "percentages": {
                            c: float(fmt_float(p)) for c, p in cell.percentages.items()
                        },
                        "uncategorized": cell.uncategorized,
                        "annotated_total": cell.annotated_total,
                    }
                    for cell in coverage.cells
                ]
            )

    if "graph" in stages:
        started = clock()
        try:
            graph = build_bipartite(result.keyword_set.origins)
            graph = filter_min_degree(graph, cfg.min_degree)
            histogram = degree_distribution(graph)
            partition = louvain_detect(graph, seed=cfg.seed, resolution=cfg.resolution)
        except GraphError as exc:
            raise StageError("graph", str(exc)) from exc
        result.graph, result.degree_histogram, result.partition = graph, histogram, partition
        result.timings["graph"] = clock() - started
        result.counts["graph"] = len(graph)
        files["graph_edges.csv"] = _csv_bytes(
            ("source", "target", "weight", "node_type"),
            [
                (u[1], v[1], fmt_float(w), f"{u[0]}-{v[0]}")
                for (u, v), w in zip(graph.edges, graph.weights)
            ],
        )
        files["degree_distribution.csv"] = _csv_bytes(
            ("degree", "count"), sorted(histogram.items())
        )
        community_of = partition.as_mapping()
        files["graph_nodes.json"] = _json_bytes(
            {
                "modularity": float(fmt_float(partition.q)),
                "nodes": [
                    {"id": node[1], "type": node[0], "community": community_of[node]}
                    for node in sorted(graph.nodes)
                ],
            }
        )

    files["summary.txt"] = _render_summary(result)
    result.manifest = {
        "version": __version__,
        "created_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "command": command,
        "config": cfg.as_dict(),
        "input_sha256": _input_hash(cfg, corpus if not cfg.inputs else None),
        "stages": {
            name: {
                "seconds": round(result.timings.get(name, 0.0), 6),
                "records": result.counts.get(name, 0),
            }
            for name in stages
        },
        "outputs": sorted([*files, "manifest.json"]),
    }
    files["manifest.json"] = _json_bytes(result.manifest)
    return result


def _render_summary(result: PipelineResult) -> bytes:
    lines = []
    corpus, assignment = result.corpus, result.assignment
    scheme = result.config.scheme()
    lines.append(f"documents: {len(corpus)} (out of range: {assignment.out_of_range})")
    lines.append(f"intervals: {scheme.interval_count} x {scheme.window_years} years from {scheme.start_year}")
    lines.append(f"periods: {scheme.period_count}")
    if result.keyword_set is not None:
        lines.append(f"keywords: {len(result.keyword_set)}")
    if result.signal_table is not None:
        for p in result.signal_table:
            by_label = {label: 0 for label in SignalLabel}
            for entry in p.entries.values():
                by_label[entry.label] += 1
            signal_count = sum(1 for e in p.entries.values() if e.is_signal)
            lines.append(
                f"P{p.period}: weak={by_label[SignalLabel.WEAK]}, "
                f"strong={by_label[SignalLabel.STRONG]}, "
                f"well-known={by_label[SignalLabel.WELL_KNOWN]}, "
                f"latent={by_label[SignalLabel.LATENT]}, "
                f"signals={signal_count}"
            )
    if result.conversions is not None:
        lines.append(f"conversions: {len(result.conversions)}")
        for target in sorted(result.emergers):
            lines.append(f"new emergers (P{target}): {len(result.emergers[target])}")
    if result.partition is not None:
        lines.append(
            f"graph: nodes={len(result.graph)}, edges={len(result.graph.edges)}, "
            f"communities={len(result.partition)}, modularity={fmt_float(result.partition.q)}"
        )
    return ("\n".join(lines) + "\n").encode("utf-8")


def write_outputs(output_dir: str | Path, files: Mapping[str, bytes]) -> list[Path]:
    """Write all rendered files; on any write error remove what was written."""
    directory = Path(output_dir)
    written: list[Path] = []
    try:
        directory.mkdir(parents=True, exist_ok=True)
        for name in sorted(files):
            path = directory / name
            path.write_bytes(files[name])
            written.append(path)
    except OSError as exc:
        for path in written:
            try:
                path.unlink()
            except OSError:  # pragma: no cover - best-effort cleanup
                pass
        raise StageError("report", f"cannot write outputs to {directory}: {exc}") from exc
    return written


def run_pipeline(
    cfg: PipelineConfig,
    command: str = "run",
    corpus: Corpus | None = None,
    provider: EmbeddingProvider | None = None,
) -> PipelineResult:
    """Execute stages and persist the report files to the output directory."""
    result = execute(cfg, command=command, corpus=corpus, provider=provider)
    write_outputs(cfg.output_dir, result.files)
    return result
