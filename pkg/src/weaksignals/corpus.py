"""Bibliographic corpus ingestion, deduplication and interval assignment."""

from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

logger = logging.getLogger(__name__)

REQUIRED_FIELDS = ("id", "title", "abstract", "year")

_YEAR_PREFIX = re.compile(r"^\s*(\d{4})")
_WS = re.compile(r"\s+")


class IngestError(Exception):
    """Unreadable input or a malformed header; record-level problems are
    counted in the summary instead."""


@dataclass(frozen=True)
class PublicationRecord:
    """One bibliographic record; title/abstract may individually be empty."""

    id: str
    title: str
    abstract: str
    year: int

    def __post_init__(self) -> None:
        if not self.title and not self.abstract:
            raise ValueError(f"record {self.id!r} has neither title nor abstract")

    @property
    def combined_text(self) -> str:
        """Title and abstract joined with a single space; empty parts skipped."""
        return " ".join(p for p in (self.title, self.abstract) if p)


def dedup_key(text: str) -> str:
    """Lowercased, whitespace-collapsed text used for duplicate detection."""
    return _WS.sub(" ", text.lower()).strip()


@dataclass(frozen=True)
class Provenance:
    sources: tuple[str, ...]
    ingested_at: str


@dataclass(frozen=True)
class Corpus:
    """Deduplicated records in deterministic (year, id) order."""

    records: tuple[PublicationRecord, ...]
    provenance: Provenance

    def __len__(self) -> int:
        return len(self.records)

    def annual_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for rec in self.records:
            counts[rec.year] = counts.get(rec.year, 0) + 1
        return dict(sorted(counts.items()))


@dataclass(frozen=True)
class IngestionSummary:
    raw: int
    retained: int
    deduplicated: int
    rejected: int
    rejected_missing_text: int = 0
    rejected_bad_year: int = 0

    def as_json(self, out_of_range: int = 0) -> dict[str, int]:
        """Payload for the ingestion summary file."""
        return {
            "raw": self.raw,
            "retained": self.retained,
            "deduplicated": self.deduplicated,
            "rejected": self.rejected,
            "out_of_range": out_of_range,
        }


def _parse_year(value: object) -> int | None:
    """Integer year; full dates are truncated to their leading year."""
    if isinstance(value, bool):
        return None
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, str):
        s = value.strip()
        try:
            return int(s)
        except ValueError:
            m = _YEAR_PREFIX.match(s)
            if m:
                return int(m.group(1))
    return None


def _read_rows(path: Path, fmt: str) -> list[dict]:
    if fmt == "csv":
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            missing = [c for c in REQUIRED_FIELDS if c not in header]
            if missing:
                raise IngestError(f"{path}: missing column(s) {', '.join(missing)}")
            return list(reader)
    if fmt == "jsonl":
        rows = []
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise IngestError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
                if "year" not in obj:
                    raise IngestError(f"{path}:{lineno}: missing 'year' field")
                rows.append(obj)
        return rows
    raise IngestError(f"unsupported format {fmt!r} (expected csv or jsonl)")


def detect_format(path: str | Path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix in (".jsonl", ".ndjson", ".json"):
        return "jsonl"
    return "csv"


def ingest_corpus(
    sources: str | Path | Sequence[str | Path],
    fmt: str | None = None,
) -> tuple[Corpus, IngestionSummary]:
    """Read bibliographic files, reject empty records, deduplicate.

    Duplicates share a normalized combined_text; the earliest (year, id)
    copy wins. Raises IngestError for unreadable files or missing columns.
    """
    if isinstance(sources, (str, Path)):
        sources = [sources]
    paths = [Path(p) for p in sources]
    rows: list[dict] = []
    for path in paths:
        if not path.exists():
            raise IngestError(f"input file not found: {path}")
        rows.extend(_read_rows(path, fmt or detect_format(path)))
    return corpus_from_rows(rows, sources=tuple(str(p) for p in paths))


def corpus_from_rows(
    rows: Sequence[Mapping], sources: tuple[str, ...] = ("<memory>",)
) -> tuple[Corpus, IngestionSummary]:
    """Clean, sort and deduplicate already-parsed rows into a Corpus."""
    raw = len(rows)
    rejected_missing_text = 0
    rejected_bad_year = 0
    parsed: list[PublicationRecord] = []
    for row in rows:
        title = str(row.get("title") or "").strip()
        abstract = str(row.get("abstract") or "").strip()
        if not title and not abstract:
            rejected_missing_text += 1
            continue
        year = _parse_year(row.get("year"))
        if year is None:
            rejected_bad_year += 1
            continue
        parsed.append(
            PublicationRecord(
                id=str(row.get("id") or "").strip(),
                title=title,
                abstract=abstract,
                year=year,
            )
        )

    parsed.sort(key=lambda r: (r.year, r.id))
    seen: set[str] = set()
    kept: list[PublicationRecord] = []
    for rec in parsed:
        key = dedup_key(rec.combined_text)
        if key in seen:
            continue
        seen.add(key)
        kept.append(rec)

    summary = IngestionSummary(
        raw=raw,
        retained=len(kept),
        deduplicated=len(parsed) - len(kept),
        rejected=rejected_missing_text + rejected_bad_year,
        rejected_missing_text=rejected_missing_text,
        rejected_bad_year=rejected_bad_year,
    )
    provenance = Provenance(
        sources=sources,
        ingested_at=datetime.now(timezone.utc).isoformat(),
    )
    return Corpus(records=tuple(kept), provenance=provenance), summary


def write_corpus_csv(corpus: Corpus, path: str | Path) -> None:
    """Normalized corpus export; re-ingesting it reproduces the records."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REQUIRED_FIELDS)
        for rec in corpus.records:
            writer.writerow([rec.id, rec.title, rec.abstract, rec.year])


@dataclass(frozen=True)
class IntervalScheme:
    """Consecutive fixed-width year windows grouped into equal periods.

    Interval j (1-based) covers
    [start_year + (j-1)*window_years, start_year + j*window_years - 1].
    """

    start_year: int = 1985
    window_years: int = 3
    interval_count: int = 12
    period_size: int = 4

    def __post_init__(self) -> None:
        if self.window_years < 1:
            raise ValueError("window_years must be >= 1")
        if self.interval_count < 1:
            raise ValueError("interval_count must be >= 1")
        if self.period_size < 1:
            raise ValueError("period_size must be >= 1")
        if self.interval_count % self.period_size != 0:
            raise ValueError(
                f"period_size ({self.period_size}) must divide "
                f"interval_count ({self.interval_count})"
            )

    @property
    def n(self) -> int:
        return self.interval_count

    @property
    def period_count(self) -> int:
        return self.interval_count // self.period_size

    @property
    def end_year(self) -> int:
        return self.start_year + self.interval_count * self.window_years - 1

    def year_bounds(self, j: int) -> tuple[int, int]:
        if not 1 <= j <= self.interval_count:
            raise ValueError(f"interval index {j} out of range 1..{self.interval_count}")
        lo = self.start_year + (j - 1) * self.window_years
        return lo, lo + self.window_years - 1

    def interval_for_year(self, year: int) -> int | None:
        if year < self.start_year or year > self.end_year:
            return None
        return (year - self.start_year) // self.window_years + 1

    def interval_label(self, j: int) -> str:
        return f"t{j:02d}"

    def periods(self) -> list[tuple[int, list[int]]]:
        """[(period index, [interval indices])], both 1-based."""
        out = []
        for p in range(self.period_count):
            first = p * self.period_size + 1
            out.append((p + 1, list(range(first, first + self.period_size))))
        return out


DEFAULT_SCHEME = IntervalScheme()


def group_periods(scheme: IntervalScheme) -> list[tuple[int, list[int]]]:
    return scheme.periods()


@dataclass(frozen=True)
class IntervalAssignment:
    """Document-to-interval map plus per-interval document counts N_j."""

    interval_of: dict[str, int]
    doc_counts: tuple[int, ...]
    out_of_range: int

    @property
    def n_docs(self) -> np.ndarray:
        return np.asarray(self.doc_counts, dtype=np.int64)

    def docs_in(self, j: int) -> list[str]:
        return sorted(d for d, jj in self.interval_of.items() if jj == j)


def assign_intervals(corpus: Corpus, scheme: IntervalScheme) -> IntervalAssignment:
    """Map each in-range document to its interval; count the rest."""
    interval_of: dict[str, int] = {}
    counts = [0] * scheme.interval_count
    out_of_range = 0
    for rec in corpus.records:
        j = scheme.interval_for_year(rec.year)
        if j is None:
            out_of_range += 1
            continue
        interval_of[rec.id] = j
        counts[j - 1] += 1
    if corpus.records and not interval_of:
        logger.warning(
            "all %d documents fall outside %d..%d; assignment is empty",
            len(corpus.records), scheme.start_year, scheme.end_year,
        )
    return IntervalAssignment(
        interval_of=interval_of,
        doc_counts=tuple(counts),
        out_of_range=out_of_range,
    )
