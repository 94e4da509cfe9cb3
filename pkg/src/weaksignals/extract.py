"""Per-interval keyword extraction and merging into a global keyword set.

Candidates are contiguous n-grams over normalized tokens. Two interchangeable
rankers are provided: a statistical one (interval term frequency weighted by
inverse interval frequency) and an embedding one (cosine similarity between
candidate vectors and the interval's mean document vector).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping, Sequence

import numpy as np

from .corpus import Corpus, IntervalAssignment
from .text import DEFAULT_STEMMER, Stemmer, Stopwords, tokenize

if TYPE_CHECKING:
    from .embeddings import EmbeddingProvider, EmbeddingVector

logger = logging.getLogger(__name__)

EXTRACTORS = ("statistical", "embedding")


class ExtractionError(Exception):
    """Extraction precondition violated (bad extractor name, missing vectors)."""


@dataclass(frozen=True)
class Candidate:
    """An n-gram candidate keyed by its stemmed form."""

    stem: str
    surface: str
    length: int
    occurrences: int


@dataclass(frozen=True)
class KeywordScore:
    candidate: Candidate
    score: float
    rank: int

    @property
    def stem(self) -> str:
        return self.candidate.stem

    @property
    def surface(self) -> str:
        return self.candidate.surface


@dataclass(frozen=True)
class KeywordSet:
    """Union of per-interval selections, with their origin lists retained."""

    terms: tuple[str, ...]
    origins: dict[int, tuple[str, ...]]
    surfaces: dict[str, str]

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, stem: str) -> bool:
        return stem in set(self.terms)

    def __iter__(self):
        return iter(self.terms)


def _window_ok(surfaces: Sequence[str], stems: Sequence[str], stopwords: Stopwords) -> bool:
    if any(tok.isdigit() for tok in surfaces):
        return False
    if stopwords.is_stop_token(surfaces[0], stems[0]):
        return False
    if stopwords.is_stop_token(surfaces[-1], stems[-1]):
        return False
    return True


def generate_candidates(
    tokens: Sequence[str],
    max_n: int = 3,
    stopwords: Stopwords | None = None,
    stemmer: Stemmer = DEFAULT_STEMMER,
) -> list[Candidate]:
    """Enumerate contiguous 1..max_n grams of one document's tokens.

    A window is kept when neither boundary token is a stopword (surface or
    stem form) and no token inside it is digit-only. Candidates are
    aggregated by stem; the surface form is the first one seen.
    """
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    if stopwords is None:
        stopwords = Stopwords.from_terms(())
    stems = [stemmer.stem(tok) for tok in tokens]
    counts: dict[str, int] = {}
    surface_of: dict[str, str] = {}
    length_of: dict[str, int] = {}
    for n in range(1, max_n + 1):
        for i in range(len(tokens) - n + 1):
            window = tokens[i : i + n]
            window_stems = stems[i : i + n]
            if not _window_ok(window, window_stems, stopwords):
                continue
            stem = " ".join(window_stems)
            counts[stem] = counts.get(stem, 0) + 1
            if stem not in surface_of:
                surface_of[stem] = " ".join(window)
                length_of[stem] = n
    return [
        Candidate(stem=s, surface=surface_of[s], length=length_of[s], occurrences=c)
        for s, c in counts.items()
    ]


@dataclass(frozen=True)
class IntervalCandidates:
    """Candidates aggregated per interval, with corpus-wide surface forms."""

    per_interval: dict[int, dict[str, Candidate]]
    interval_count: int

    def intervals_containing(self, stem: str) -> int:
        return sum(1 for cands in self.per_interval.values() if stem in cands)


def collect_candidates(
    corpus: Corpus,
    assignment: IntervalAssignment,
    max_n: int = 3,
    stopwords: Stopwords | None = None,
    stemmer: Stemmer = DEFAULT_STEMMER,
) -> IntervalCandidates:
    """Per-interval candidate tables; occurrences summed over the interval."""
    n_intervals = len(assignment.doc_counts)
    per_interval: dict[int, dict[str, Candidate]] = {j: {} for j in range(1, n_intervals + 1)}
    surface_of: dict[str, str] = {}
    for rec in corpus.records:
        j = assignment.interval_of.get(rec.id)
        if j is None:
            continue
        table = per_interval[j]
        for cand in generate_candidates(
            tokenize(rec.combined_text), max_n=max_n, stopwords=stopwords, stemmer=stemmer
        ):
            surface = surface_of.setdefault(cand.stem, cand.surface)
            prev = table.get(cand.stem)
            occurrences = cand.occurrences + (prev.occurrences if prev else 0)
            table[cand.stem] = Candidate(
                stem=cand.stem, surface=surface, length=cand.length, occurrences=occurrences
            )
    return IntervalCandidates(per_interval=per_interval, interval_count=n_intervals)


def score_statistical(
    candidates: IntervalCandidates, n_intervals: int | None = None
) -> dict[int, list[tuple[Candidate, float]]]:
    """Rank each interval's candidates by TF x ln(intervals / interval-df).

    The document-frequency component counts the intervals whose candidate
    table contains the stem, so a stem present everywhere scores zero. Ties
    fall back to higher occurrence count, then to lexicographic stem order.
    """
    n = n_intervals if n_intervals is not None else candidates.interval_count
    df: dict[str, int] = {}
    for table in candidates.per_interval.values():
        for stem in table:
            df[stem] = df.get(stem, 0) + 1
    ranked: dict[int, list[tuple[Candidate, float]]] = {}
    for j, table in candidates.per_interval.items():
        scored = [
            (cand, cand.occurrences * math.log(n / df[stem]))
            for stem, cand in table.items()
        ]
        scored.sort(key=lambda cs: (-cs[1], -cs[0].occurrences, cs[0].stem))
        ranked[j] = scored
    return ranked


def rank_by_cosine(
    doc_vector: "EmbeddingVector",
    candidate_vectors: Sequence["EmbeddingVector"],
    k: int | None = None,
) -> list[tuple[str, float]]:
    """Keys of `candidate_vectors` ordered by cosine similarity to the
    document vector, descending; ties broken lexicographically by key.

    Raises on dimension mismatch or a zero-norm document vector; zero-norm
    candidates are skipped with a warning.
    """
    from .embeddings import EmbeddingError

    doc = np.asarray(doc_vector.values, dtype=np.float64)
    doc_norm = float(np.linalg.norm(doc))
    if doc_norm == 0.0:
        raise EmbeddingError(f"document vector {doc_vector.key!r} has zero norm")
    scored: list[tuple[str, float]] = []
    for cand in candidate_vectors:
        vec = np.asarray(cand.values, dtype=np.float64)
        if vec.shape != doc.shape:
            raise EmbeddingError(
                f"vector {cand.key!r} has dim {vec.shape[0]}, expected {doc.shape[0]}"
            )
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            logger.warning("skipping zero-norm candidate vector %r", cand.key)
            continue
        scored.append((cand.key, float(np.dot(doc, vec) / (doc_norm * norm))))
    scored.sort(key=lambda ks: (-ks[1], ks[0]))
    return scored if k is None else scored[:k]


def extract_top_k(scored: Sequence[tuple[Candidate, float]], k: int) -> list[KeywordScore]:
    """The first min(k, available) entries of a ranked list, with 1-based ranks."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return [
        KeywordScore(candidate=cand, score=score, rank=i)
        for i, (cand, score) in enumerate(scored[:k], start=1)
    ]


def merge_keyword_sets(
    selections: Mapping[int, Sequence[KeywordScore]], stopwords: Stopwords | None = None
) -> KeywordSet:
    """Union of the per-interval selections minus stopword stems."""
    if stopwords is None:
        stopwords = Stopwords.from_terms(())
    origins: dict[int, tuple[str, ...]] = {}
    surfaces: dict[str, str] = {}
    terms: set[str] = set()
    for j in sorted(selections):
        kept = [ks for ks in selections[j] if not stopwords.is_stop_stem(ks.stem)]
        origins[j] = tuple(ks.stem for ks in kept)
        for ks in kept:
            terms.add(ks.stem)
            surfaces.setdefault(ks.stem, ks.surface)
    return KeywordSet(terms=tuple(sorted(terms)), origins=origins, surfaces=surfaces)


def extract_keywords(
    corpus: Corpus,
    assignment: IntervalAssignment,
    extractor: str = "statistical",
    k: int = 500,
    max_n: int = 3,
    stopwords: Stopwords | None = None,
    stemmer: Stemmer = DEFAULT_STEMMER,
    provider: "EmbeddingProvider | None" = None,
) -> tuple[dict[int, list[KeywordScore]], KeywordSet]:
    """Run one extractor over every interval and merge the selections.

    Returns (per-interval ranked selections, merged keyword set). Empty
    intervals yield empty selections with a warning.
    """
    if extractor not in EXTRACTORS:
        raise ExtractionError(f"unknown extractor {extractor!r}; expected one of {EXTRACTORS}")
    candidates = collect_candidates(
        corpus, assignment, max_n=max_n, stopwords=stopwords, stemmer=stemmer
    )
    if extractor == "statistical":
        ranked = score_statistical(candidates)
    else:
        if provider is None:
            raise ExtractionError("embedding extractor requires a vector provider")
        ranked = _rank_by_embeddings(corpus, assignment, candidates, provider)
    selections: dict[int, list[KeywordScore]] = {}
    for j in sorted(candidates.per_interval):
        if assignment.doc_counts[j - 1] == 0:
            logger.warning("interval %d has no documents; nothing to extract", j)
            selections[j] = []
            continue
        selections[j] = extract_top_k(ranked.get(j, []), k)
    return selections, merge_keyword_sets(selections, stopwords=stopwords)


def _rank_by_embeddings(
    corpus: Corpus,
    assignment: IntervalAssignment,
    candidates: IntervalCandidates,
    provider: "EmbeddingProvider",
) -> dict[int, list[tuple[Candidate, float]]]:
    """Cosine-rank each interval's candidates against its mean document vector."""
    from .embeddings import EmbeddingError, EmbeddingVector

    doc_items = [
        (rec.id, rec.combined_text)
        for rec in corpus.records
        if rec.id in assignment.interval_of
    ]
    doc_vectors = provider.vectors(doc_items)
    all_stems = sorted({s for table in candidates.per_interval.values() for s in table})
    stem_vectors = provider.vectors([(s, s) for s in all_stems])

    ranked: dict[int, list[tuple[Candidate, float]]] = {}
    for j, table in candidates.per_interval.items():
        if not table:
            ranked[j] = []
            continue
        rows = []
        for doc_id, _ in doc_items:
            if assignment.interval_of[doc_id] != j:
                continue
            if doc_id not in doc_vectors:
                raise EmbeddingError(f"no vector for document {doc_id!r}")
            rows.append(doc_vectors[doc_id].values)
        if not rows:
            ranked[j] = []
            continue
        centroid = EmbeddingVector(key=f"interval-{j}", values=np.mean(rows, axis=0))
        available = []
        for stem in sorted(table):
            vec = stem_vectors.get(stem)
            if vec is None:
                logger.warning("no vector for candidate %r; skipping", stem)
                continue
            available.append(vec)
        ranked[j] = [
            (table[key], sim) for key, sim in rank_by_cosine(centroid, available)
        ]
    return ranked
