"""Estimator-style facade over the pipeline.

`WeakSignalDetector` follows the scikit-learn conventions: constructor
parameters are stored verbatim, `fit` computes underscore-suffixed
attributes, and `get_params`/`set_params` come from `BaseEstimator`.
The corpus plays the role of X; there is no y.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .config import PipelineConfig
from .corpus import Corpus, corpus_from_rows
from .evolution import (
    query_constant,
    query_conversions,
    query_new_emergers,
    query_sinusoidal,
)
from .pipeline import execute
from .signals import SignalLabel
from .text import make_stemmer, tokenize


class WeakSignalDetector(BaseEstimator):
    """Detect weak and strong signals in a time-stamped publication corpus.

    Parameters mirror the pipeline configuration; `random_state` seeds the
    community detection. `fit` accepts a `Corpus`, one or more file paths,
    or an iterable of record mappings with id/title/abstract/year fields.

    Examples
    --------
    >>> detector = WeakSignalDetector(interval_count=4, period_size=2,
    ...                               top_k=10, include_graph=False)
    >>> detector.fit("corpus.csv")           # doctest: +SKIP
    >>> detector.signals_[0].period          # doctest: +SKIP
    1
    """

    def __init__(
        self,
        start_year: int = 1985,
        window_years: int = 3,
        interval_count: int = 12,
        period_size: int = 4,
        extractor: str = "statistical",
        top_k: int = 500,
        max_n: int = 3,
        stopwords_path: str | None = None,
        stemmer: str = "porter",
        time_weight: float = 0.05,
        epsilon: float = 0.5,
        normalize_x: bool = False,
        min_degree: int = 0,
        random_state: int = 0,
        resolution: float = 1.0,
        embed_url: str | None = None,
        vectors_path: str | None = None,
        embed_batch_size: int = 32,
        input_format: str | None = None,
        annotations_path: str | None = None,
        include_graph: bool = True,
        provider: object | None = None,
    ):
        self.start_year = start_year
        self.window_years = window_years
        self.interval_count = interval_count
        self.period_size = period_size
        self.extractor = extractor
        self.top_k = top_k
        self.max_n = max_n
        self.stopwords_path = stopwords_path
        self.stemmer = stemmer
        self.time_weight = time_weight
        self.epsilon = epsilon
        self.normalize_x = normalize_x
        self.min_degree = min_degree
        self.random_state = random_state
        self.resolution = resolution
        self.embed_url = embed_url
        self.vectors_path = vectors_path
        self.embed_batch_size = embed_batch_size
        self.input_format = input_format
        self.annotations_path = annotations_path
        self.include_graph = include_graph
        self.provider = provider

    def _config(self, inputs: tuple[str, ...]) -> PipelineConfig:
        return PipelineConfig(
            inputs=inputs,
            input_format=self.input_format,
            start_year=self.start_year,
            window_years=self.window_years,
            interval_count=self.interval_count,
            period_size=self.period_size,
            extractor=self.extractor,
            top_k=self.top_k,
            max_n=self.max_n,
            stopwords_path=self.stopwords_path,
            stemmer=self.stemmer,
            time_weight=self.time_weight,
            epsilon=self.epsilon,
            normalize_x=self.normalize_x,
            min_degree=self.min_degree,
            seed=self.random_state,
            resolution=self.resolution,
            embed_url=self.embed_url,
            vectors_path=self.vectors_path,
            embed_batch_size=self.embed_batch_size,
            annotations_path=self.annotations_path,
            include_graph=self.include_graph,
        )

    @staticmethod
    def _coerce_input(X) -> tuple[Corpus | None, tuple[str, ...]]:
        if isinstance(X, Corpus):
            return X, ()
        if isinstance(X, (str, Path)):
            return None, (str(X),)
        if isinstance(X, Iterable):
            items = list(X)
            if not items:
                raise ValueError("fit requires a non-empty corpus")
            if all(isinstance(item, (str, Path)) for item in items):
                return None, tuple(str(p) for p in items)
            if all(isinstance(item, Mapping) for item in items):
                corpus, _ = corpus_from_rows(items)
                return corpus, ()
        raise TypeError(
            "X must be a Corpus, a path, a sequence of paths, or a sequence "
            f"of record mappings; got {type(X).__name__}"
        )

    def fit(self, X, y=None) -> "WeakSignalDetector":
        """Run the pipeline on X and keep every stage result as an attribute."""
        corpus, inputs = self._coerce_input(X)
        cfg = self._config(inputs)
        result = execute(cfg, command="run", corpus=corpus, provider=self.provider)
        self.result_ = result
        self.config_ = cfg
        self.corpus_ = result.corpus
        self.summary_ = result.summary
        self.assignment_ = result.assignment
        self.selections_ = result.selections
        self.keyword_set_ = result.keyword_set
        self.frequency_ = result.frequency
        self.visibility_ = result.visibility
        self.diffusion_ = result.diffusion
        self.maps_ = result.maps
        self.signals_ = result.signal_table
        self.traces_ = result.traces
        self.keywords_ = tuple(t.keyword for t in result.traces)
        self.conversions_ = result.conversions
        self.coverage_ = result.coverage
        self.graph_ = result.graph
        self.partition_ = result.partition
        return self

    def _stems_of(self, X) -> list[str]:
        stemmer = make_stemmer(self.stemmer)
        if isinstance(X, str):
            X = [X]
        stems = []
        for keyword in X:
            stems.append(" ".join(stemmer.stem(tok) for tok in tokenize(str(keyword))))
        return stems

    def transform(self, X=None) -> np.ndarray:
        """Label matrix (keywords x periods); unknown keywords are unclassified.

        X may be keyword strings (surfaces are stemmed first); None means all
        keywords seen during fit.
        """
        check_is_fitted(self, "traces_")
        trace_of = {t.keyword: t for t in self.traces_}
        stems = list(self.keywords_) if X is None else self._stems_of(X)
        periods = len(self.signals_)
        rows = []
        for stem in stems:
            trace = trace_of.get(stem)
            if trace is None:
                rows.append([SignalLabel.UNCLASSIFIED.value] * periods)
            else:
                rows.append([label.value for label in trace.labels])
        return np.asarray(rows, dtype=object).reshape(len(stems), periods)

    def fit_transform(self, X, y=None) -> np.ndarray:
        return self.fit(X).transform()

    def predict(self, X=None) -> np.ndarray:
        """Final-period label per keyword."""
        return self.transform(X)[:, -1]

    def conversions(self) -> list[tuple[str, int, int]]:
        """Keywords that turned from weak to strong, with the period pair."""
        check_is_fitted(self, "traces_")
        return query_conversions(self.traces_)

    def new_emergers(self, target: int) -> list[str]:
        """Keywords first becoming weak signals in the target period."""
        check_is_fitted(self, "traces_")
        return query_new_emergers(self.traces_, target)

    def constant(self, label: str | SignalLabel) -> list[str]:
        """Keywords holding one label across all periods."""
        check_is_fitted(self, "traces_")
        return query_constant(self.traces_, SignalLabel(label))

    def sinusoidal(self) -> list[str]:
        """Keywords alternating weak and strong across consecutive periods."""
        check_is_fitted(self, "traces_")
        return query_sinusoidal(self.traces_)
