"""Keyword trajectories across periods and queries over them.

A trace records one label per period for every keyword that appears in any
period's maps. Periods where the keyword was excluded (zero counts) or where
the two maps disagreed are marked unclassified, so traces always have the
same length as the horizon has periods.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .signals import SignalLabel, SignalTable
from .text import DEFAULT_STEMMER, Stemmer, tokenize

logger = logging.getLogger(__name__)

COVERAGE_KINDS = ("all", "weak", "strong")


class EvolutionError(Exception):
    """Malformed annotations or inconsistent trace inputs."""


@dataclass(frozen=True)
class EvolutionTrace:
    keyword: str
    labels: tuple[SignalLabel, ...]

    def __len__(self) -> int:
        return len(self.labels)

    def label_in(self, period: int) -> SignalLabel:
        return self.labels[period - 1]


def build_traces(table: SignalTable) -> tuple[EvolutionTrace, ...]:
    """One trace per keyword seen in any period, ordered by keyword."""
    horizon = len(table)
    traces = []
    for stem in table.keywords():
        labels = []
        for p in table:
            labels.append(p.label_of(stem) or SignalLabel.UNCLASSIFIED)
        traces.append(EvolutionTrace(keyword=stem, labels=tuple(labels)))
        if len(labels) != horizon:
            raise EvolutionError(f"trace for {stem!r} has {len(labels)} labels")
    return tuple(traces)


def query_conversions(traces: Iterable[EvolutionTrace]) -> list[tuple[str, int, int]]:
    """Weak-to-strong transitions between adjacent periods."""
    hits = []
    for trace in traces:
        for p in range(1, len(trace)):
            if (
                trace.labels[p - 1] is SignalLabel.WEAK
                and trace.labels[p] is SignalLabel.STRONG
            ):
                hits.append((trace.keyword, p, p + 1))
    return hits


def query_new_emergers(
    traces: Iterable[EvolutionTrace], target: int
) -> list[str]:
    """Keywords weak in the target period with no prior signal activity.

    Earlier periods may be unclassified or latent; any earlier weak, strong
    or well-known label disqualifies the keyword.
    """
    if target < 2:
        raise EvolutionError("new emergers need a target period >= 2")
    hits = []
    for trace in traces:
        if target > len(trace):
            raise EvolutionError(
                f"target period {target} beyond trace length {len(trace)}"
            )
        if trace.label_in(target) is not SignalLabel.WEAK:
            continue
        if any(trace.labels[p].is_signal for p in range(target - 1)):
            continue
        hits.append(trace.keyword)
    return hits


def query_constant(
    traces: Iterable[EvolutionTrace], label: SignalLabel
) -> list[str]:
    """Keywords holding the same label in every period."""
    return [t.keyword for t in traces if all(x is label for x in t.labels)]


def query_sinusoidal(traces: Iterable[EvolutionTrace]) -> list[str]:
    """Keywords alternating weak/strong over three consecutive periods."""
    w, s = SignalLabel.WEAK, SignalLabel.STRONG
    hits = []
    for trace in traces:
        for p in range(len(trace) - 2):
            window = trace.labels[p : p + 3]
            if window == (w, s, w) or window == (s, w, s):
                hits.append(trace.keyword)
                break
    return hits


def pattern_flags(trace: EvolutionTrace) -> str:
    """Compact semicolon-joined markers for notable trajectory shapes."""
    flags = []
    if any(
        trace.labels[p - 1] is SignalLabel.WEAK
        and trace.labels[p] is SignalLabel.STRONG
        for p in range(1, len(trace))
    ):
        flags.append("conversion")
    for label in (SignalLabel.WEAK, SignalLabel.STRONG, SignalLabel.WELL_KNOWN, SignalLabel.LATENT):
        if all(x is label for x in trace.labels):
            flags.append(f"constant-{label.value}")
    if query_sinusoidal([trace]):
        flags.append("sinusoidal")
    return ";".join(flags)


@dataclass(frozen=True)
class CategoryAnnotation:
    keyword: str
    category: str
    abbreviation: str


def load_annotations(
    path: str | Path, stemmer: Stemmer = DEFAULT_STEMMER
) -> dict[str, CategoryAnnotation]:
    """Read keyword,category,abbrev rows; keywords are stemmed for joining."""
    annotations: dict[str, CategoryAnnotation] = {}
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            if reader.fieldnames is None or not {
                "keyword",
                "category",
                "abbrev",
            }.issubset(reader.fieldnames):
                raise EvolutionError(
                    f"{path}: annotation file needs keyword,category,abbrev columns"
                )
            for row in reader:
                stem = " ".join(stemmer.stem(tok) for tok in tokenize(row["keyword"]))
                if not stem:
                    raise EvolutionError(f"{path}: empty keyword in annotations")
                ann = CategoryAnnotation(
                    keyword=stem,
                    category=row["category"].strip(),
                    abbreviation=row["abbrev"].strip(),
                )
                previous = annotations.get(stem)
                if previous is not None and previous.category != ann.category:
                    raise EvolutionError(
                        f"{path}: conflicting categories for {stem!r}: "
                        f"{previous.category!r} vs {ann.category!r}"
                    )
                annotations[stem] = ann
    except OSError as exc:
        raise EvolutionError(f"cannot read annotations {path}: {exc}") from exc
    return annotations


@dataclass(frozen=True)
class CoverageCell:
    """Category shares for one (period, kind) slice of the signal table."""

    period: int
    kind: str
    counts: dict[str, int]
    percentages: dict[str, float]
    uncategorized: int
    annotated_total: int


@dataclass(frozen=True)
class CoverageReport:
    cells: tuple[CoverageCell, ...]

    def cell(self, period: int, kind: str) -> CoverageCell:
        for c in self.cells:
            if c.period == period and c.kind == kind:
                return c
        raise KeyError((period, kind))


def category_coverage(
    table: SignalTable,
    annotations: Mapping[str, CategoryAnnotation],
) -> CoverageReport:
    """Category percentages per period for all signals, weak only, strong only.

    Percentages are taken over annotated keywords so each nonempty cell sums
    to 100; unannotated keywords are tallied separately as uncategorized.
    """
    cells = []
    for p in table:
        for kind in COVERAGE_KINDS:
            if kind == "all":
                members = [e.keyword for e in p.entries.values() if e.is_signal]
            else:
                wanted = SignalLabel(kind)
                members = [
                    e.keyword for e in p.entries.values() if e.label is wanted
                ]
            counts: dict[str, int] = {}
            uncategorized = 0
            for stem in members:
                ann = annotations.get(stem)
                if ann is None:
                    uncategorized += 1
                else:
                    counts[ann.category] = counts.get(ann.category, 0) + 1
            total = sum(counts.values())
            percentages = {
                cat: 100.0 * c / total for cat, c in sorted(counts.items())
            }
            cells.append(
                CoverageCell(
                    period=p.period,
                    kind=kind,
                    counts=dict(sorted(counts.items())),
                    percentages=percentages,
                    uncategorized=uncategorized,
                    annotated_total=total,
                )
            )
    return CoverageReport(cells=tuple(cells))
