"""Frequency tables, time-weighted scores, portfolio maps and their intersection.

Per keyword i and interval j the pipeline tracks the total occurrence count
TF_ij and the containing-document count DF_ij. The visibility score is
(TF_ij / N_j) * (1 - w * (n - j)) and the diffusion score is the same with
DF_ij, where N_j is the interval's document count, n the number of intervals
and w a time-weight constant that discounts early intervals.

Each period yields two maps: the emergence map ("kem", built from TF and
visibility growth) and the issue map ("kim", from DF and diffusion growth).
Both plot mean count against geometric-mean score growth and split the plane
at the medians; a keyword becomes a signal only when the two maps agree.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .corpus import Corpus, IntervalAssignment, IntervalScheme
from .extract import KeywordSet
from .text import DEFAULT_STEMMER, Stemmer, normalize_text

logger = logging.getLogger(__name__)

MAP_KINDS = ("kem", "kim")


class SignalError(Exception):
    """Inconsistent counts or a map that cannot be built."""


class SignalLabel(str, enum.Enum):
    WEAK = "weak"
    STRONG = "strong"
    LATENT = "latent"
    WELL_KNOWN = "well-known"
    UNCLASSIFIED = "unclassified"

    @property
    def is_signal(self) -> bool:
        return self in (SignalLabel.WEAK, SignalLabel.STRONG, SignalLabel.WELL_KNOWN)

    def __str__(self) -> str:  # so f-strings print the bare value
        return self.value


@dataclass(frozen=True)
class FrequencyTable:
    """TF/DF counts per keyword x interval, plus interval document counts."""

    keywords: tuple[str, ...]
    tf: np.ndarray
    df: np.ndarray
    n_docs: np.ndarray

    def __post_init__(self) -> None:
        tf = np.asarray(self.tf, dtype=np.int64)
        df = np.asarray(self.df, dtype=np.int64)
        n_docs = np.asarray(self.n_docs, dtype=np.int64)
        k, n = len(self.keywords), n_docs.shape[0]
        if tf.shape != (k, n) or df.shape != (k, n):
            raise SignalError(
                f"count shapes {tf.shape}/{df.shape} do not match "
                f"{k} keywords x {n} intervals"
            )
        if (tf < 0).any() or (df < 0).any() or (n_docs < 0).any():
            raise SignalError("counts must be nonnegative")
        if (df > tf).any():
            raise SignalError("document frequency cannot exceed term frequency")
        if (df > n_docs[np.newaxis, :]).any():
            raise SignalError("document frequency cannot exceed interval document count")
        object.__setattr__(self, "tf", tf)
        object.__setattr__(self, "df", df)
        object.__setattr__(self, "n_docs", n_docs)

    @property
    def interval_count(self) -> int:
        return int(self.n_docs.shape[0])

    def index_of(self, stem: str) -> int:
        try:
            return self.keywords.index(stem)
        except ValueError:
            raise KeyError(stem) from None

    def counts(self, kind: str) -> np.ndarray:
        if kind == "kem":
            return self.tf
        if kind == "kim":
            return self.df
        raise SignalError(f"unknown map kind {kind!r}; expected one of {MAP_KINDS}")


def count_frequencies(
    corpus: Corpus,
    assignment: IntervalAssignment,
    keyword_set: KeywordSet | Iterable[str],
    stemmer: Stemmer = DEFAULT_STEMMER,
) -> FrequencyTable:
    """Count keyword occurrences per interval over normalized document text.

    Multi-token stems are matched as contiguous runs in the stemmed token
    sequence; overlapping matches all count toward TF.
    """
    keywords = tuple(sorted(set(keyword_set)))
    if not keywords:
        raise SignalError("keyword set is empty; nothing to count")
    n = len(assignment.doc_counts)
    tf = np.zeros((len(keywords), n), dtype=np.int64)
    df = np.zeros((len(keywords), n), dtype=np.int64)
    by_length: dict[int, list[tuple[int, tuple[str, ...]]]] = {}
    for idx, stem in enumerate(keywords):
        parts = tuple(stem.split(" "))
        by_length.setdefault(len(parts), []).append((idx, parts))
    for rec in corpus.records:
        j = assignment.interval_of.get(rec.id)
        if j is None:
            continue
        stems = normalize_text(rec.combined_text, stemmer)
        for length, entries in by_length.items():
            if len(stems) < length:
                continue
            grams: dict[tuple[str, ...], int] = {}
            for i in range(len(stems) - length + 1):
                gram = tuple(stems[i : i + length])
                grams[gram] = grams.get(gram, 0) + 1
            for idx, parts in entries:
                c = grams.get(parts, 0)
                if c:
                    tf[idx, j - 1] += c
                    df[idx, j - 1] += 1
    return FrequencyTable(
        keywords=keywords, tf=tf, df=df, n_docs=np.asarray(assignment.doc_counts)
    )


def interval_weights(n: int, w: float) -> np.ndarray:
    """Time weights 1 - w*(n - j) for j = 1..n; exactly 1 at the last interval."""
    j = np.arange(1, n + 1, dtype=np.float64)
    return 1.0 - w * (n - j)


@dataclass(frozen=True)
class ScoreMatrix:
    """Visibility ("kem") or diffusion ("kim") scores per keyword x interval."""

    kind: str
    keywords: tuple[str, ...]
    values: np.ndarray
    w: float
    n: int

    def row(self, stem: str) -> np.ndarray:
        return self.values[self.keywords.index(stem)]


def compute_score(
    freq: FrequencyTable, kind: str, w: float = 0.05, n: int | None = None
) -> ScoreMatrix:
    """Time-weighted normalized counts: (count_ij / N_j) * (1 - w * (n - j))."""
    counts = freq.counts(kind)
    n_intervals = freq.interval_count if n is None else n
    if n_intervals != freq.interval_count:
        raise SignalError(
            f"n={n_intervals} does not match the table's {freq.interval_count} intervals"
        )
    if not 0.0 <= w * (n_intervals - 1) < 1.0:
        raise SignalError(
            f"time weight w={w} with n={n_intervals} leaves nonpositive weights "
            "(need 0 <= w*(n-1) < 1)"
        )
    empty = freq.n_docs == 0
    if (counts[:, empty] > 0).any():
        raise SignalError("interval with zero documents has nonzero counts")
    denom = np.where(empty, 1, freq.n_docs).astype(np.float64)
    values = (counts / denom) * interval_weights(n_intervals, w)
    return ScoreMatrix(
        kind=kind, keywords=freq.keywords, values=values, w=w, n=n_intervals
    )


def growth_geomean(
    scores: np.ndarray,
    weights: np.ndarray,
    n_docs: np.ndarray,
    epsilon: float = 0.5,
) -> float:
    """Geometric mean of successive score ratios with zero-smoothing.

    Scores are floored at epsilon * weight_j / N_j before forming ratios, so
    intervals where the keyword is absent contribute finite growth instead of
    dividing by zero.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.shape[0] < 2:
        raise SignalError("growth needs at least two intervals")
    if epsilon <= 0:
        raise SignalError("smoothing epsilon must be positive")
    n_docs = np.asarray(n_docs, dtype=np.float64)
    if (n_docs == 0).any():
        raise SignalError("cannot smooth growth over an interval with zero documents")
    floor = epsilon * np.asarray(weights, dtype=np.float64) / n_docs
    smoothed = np.maximum(scores, floor)
    ratios = smoothed[1:] / smoothed[:-1]
    return float(np.exp(np.mean(np.log(ratios))))


@dataclass(frozen=True)
class MapPoint:
    keyword: str
    x: float
    y: float
    quadrant: SignalLabel


@dataclass(frozen=True)
class PortfolioMap:
    kind: str
    period: int
    points: tuple[MapPoint, ...]
    median_x: float
    median_y: float
    excluded: tuple[str, ...]

    def point_of(self, stem: str) -> MapPoint | None:
        for p in self.points:
            if p.keyword == stem:
                return p
        return None

    @property
    def universe(self) -> frozenset[str]:
        return frozenset(p.keyword for p in self.points) | frozenset(self.excluded)


def classify(x: float, y: float, median_x: float, median_y: float) -> SignalLabel:
    """Quadrant of a map point; values equal to a median count as low."""
    high_x = x > median_x
    high_y = y > median_y
    if high_y:
        return SignalLabel.STRONG if high_x else SignalLabel.WEAK
    return SignalLabel.WELL_KNOWN if high_x else SignalLabel.LATENT


def build_map(
    kind: str,
    period: int,
    freq: FrequencyTable,
    scores: ScoreMatrix,
    scheme: IntervalScheme,
    epsilon: float = 0.5,
    normalize_x: bool = False,
) -> PortfolioMap:
    """Median-split portfolio map for one period.

    x is the mean count over the period's intervals (optionally normalized by
    N_j), y the geometric-mean growth of the score row. Keywords with zero
    count across the whole period are excluded. Needs >= 2 included keywords.
    """
    if scores.kind != kind:
        raise SignalError(f"score matrix is {scores.kind!r}, map wants {kind!r}")
    if scores.keywords != freq.keywords:
        raise SignalError("score matrix and frequency table keywords differ")
    intervals = dict(scheme.periods()).get(period)
    if intervals is None:
        raise SignalError(f"period {period} not in scheme (1..{scheme.period_count})")
    cols = [j - 1 for j in intervals]
    counts = freq.counts(kind)[:, cols]
    totals = counts.sum(axis=1)
    included = totals > 0
    if int(included.sum()) < 2:
        raise SignalError(
            f"period {period} has {int(included.sum())} keyword(s) with nonzero "
            "counts; at least 2 are needed for a median split"
        )
    n_docs = freq.n_docs[cols]
    if normalize_x:
        x_all = (counts / np.where(n_docs == 0, 1, n_docs)).mean(axis=1)
    else:
        x_all = counts.mean(axis=1)
    weights = interval_weights(scores.n, scores.w)[cols]
    points: list[MapPoint] = []
    xs: list[float] = []
    ys: list[float] = []
    excluded: list[str] = []
    for i, stem in enumerate(freq.keywords):
        if not included[i]:
            excluded.append(stem)
            continue
        y = growth_geomean(
            scores.values[i, cols], weights=weights, n_docs=n_docs, epsilon=epsilon
        )
        xs.append(float(x_all[i]))
        ys.append(y)
        points.append(MapPoint(keyword=stem, x=float(x_all[i]), y=y, quadrant=SignalLabel.LATENT))
    median_x = float(np.median(xs))
    median_y = float(np.median(ys))
    labeled = tuple(
        MapPoint(p.keyword, p.x, p.y, classify(p.x, p.y, median_x, median_y))
        for p in points
    )
    return PortfolioMap(
        kind=kind,
        period=period,
        points=labeled,
        median_x=median_x,
        median_y=median_y,
        excluded=tuple(excluded),
    )


@dataclass(frozen=True)
class SignalEntry:
    keyword: str
    label: SignalLabel
    is_signal: bool
    kem_x: float
    kem_y: float
    kim_x: float
    kim_y: float


@dataclass(frozen=True)
class PeriodSignals:
    """Agreed labels for one period plus the keyword universe behind them."""

    period: int
    entries: dict[str, SignalEntry]
    included: tuple[str, ...]
    excluded: tuple[str, ...]

    def label_of(self, stem: str) -> SignalLabel | None:
        entry = self.entries.get(stem)
        return entry.label if entry else None

    def signals(self) -> list[SignalEntry]:
        return [e for e in self.entries.values() if e.is_signal]


def combine_labels(kem: SignalLabel, kim: SignalLabel) -> tuple[SignalLabel | None, bool]:
    """Final label when both maps agree, else None; second item flags a signal."""
    if kem != kim:
        return None, False
    return kem, kem.is_signal


def intersect_maps(kem: PortfolioMap, kim: PortfolioMap) -> PeriodSignals:
    """Keep keywords whose quadrant agrees between the two maps."""
    if kem.kind != "kem" or kim.kind != "kim":
        raise SignalError(f"expected a kem/kim pair, got {kem.kind!r}/{kim.kind!r}")
    if kem.period != kim.period:
        raise SignalError(f"period mismatch: {kem.period} vs {kim.period}")
    if kem.universe != kim.universe:
        raise SignalError("maps cover different keyword universes")
    kim_points = {p.keyword: p for p in kim.points}
    entries: dict[str, SignalEntry] = {}
    for p in kem.points:
        q = kim_points[p.keyword]
        label, is_signal = combine_labels(p.quadrant, q.quadrant)
        if label is None:
            continue
        entries[p.keyword] = SignalEntry(
            keyword=p.keyword,
            label=label,
            is_signal=is_signal,
            kem_x=p.x,
            kem_y=p.y,
            kim_x=q.x,
            kim_y=q.y,
        )
    return PeriodSignals(
        period=kem.period,
        entries=entries,
        included=tuple(p.keyword for p in kem.points),
        excluded=kem.excluded,
    )


@dataclass(frozen=True)
class SignalTable:
    """Per-period agreed signal labels across the whole horizon."""

    periods: tuple[PeriodSignals, ...]

    def __post_init__(self) -> None:
        indices = [p.period for p in self.periods]
        if indices != sorted(indices) or len(set(indices)) != len(indices):
            raise SignalError("periods must be unique and ascending")

    def __iter__(self):
        return iter(self.periods)

    def __len__(self) -> int:
        return len(self.periods)

    def period(self, index: int) -> PeriodSignals:
        for p in self.periods:
            if p.period == index:
                return p
        raise KeyError(index)

    def keywords(self) -> tuple[str, ...]:
        """Sorted union of keywords included in any period's maps."""
        seen: set[str] = set()
        for p in self.periods:
            seen.update(p.included)
        return tuple(sorted(seen))


def build_signal_table(
    freq: FrequencyTable,
    kem_scores: ScoreMatrix,
    kim_scores: ScoreMatrix,
    scheme: IntervalScheme,
    epsilon: float = 0.5,
    normalize_x: bool = False,
) -> tuple[SignalTable, dict[tuple[str, int], PortfolioMap]]:
    """All per-period maps plus their intersections."""
    maps: dict[tuple[str, int], PortfolioMap] = {}
    slices: list[PeriodSignals] = []
    for period, _ in scheme.periods():
        kem = build_map(
            "kem", period, freq, kem_scores, scheme, epsilon=epsilon, normalize_x=normalize_x
        )
        kim = build_map(
            "kim", period, freq, kim_scores, scheme, epsilon=epsilon, normalize_x=normalize_x
        )
        maps[("kem", period)] = kem
        maps[("kim", period)] = kim
        slices.append(intersect_maps(kem, kim))
    return SignalTable(periods=tuple(slices)), maps
