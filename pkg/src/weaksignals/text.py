"""Tokenization, stemming and stopword handling shared by the pipeline."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Protocol

from ._porter import IdentityStemmer, PorterStemmer

_TOKEN_BOUNDARY = re.compile(r"[\W_]+", re.UNICODE)


class Stemmer(Protocol):
    def stem(self, word: str) -> str: ...


DEFAULT_STEMMER: Stemmer = PorterStemmer()

STEMMERS = {
    "porter": PorterStemmer,
    "none": IdentityStemmer,
}


def make_stemmer(name: str) -> Stemmer:
    try:
        return STEMMERS[name]()
    except KeyError:
        raise ValueError(f"unknown stemmer {name!r}; choose from {sorted(STEMMERS)}")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric run."""
    return [t for t in _TOKEN_BOUNDARY.split(text.lower()) if t]


def normalize_text(text: str, stemmer: Stemmer | None = None) -> list[str]:
    """Lowercased, punctuation-stripped, stemmed token stream.

    Deterministic; empty input yields an empty list.
    """
    stemmer = stemmer or DEFAULT_STEMMER
    return [stemmer.stem(t) for t in tokenize(text)]


@dataclass(frozen=True)
class Stopwords:
    """Stopword list matched against both surface tokens and their stems."""

    words: frozenset[str] = frozenset()
    stems: frozenset[str] = frozenset()

    @classmethod
    def from_terms(cls, terms: Iterable[str], stemmer: Stemmer | None = None) -> "Stopwords":
        stemmer = stemmer or DEFAULT_STEMMER
        words = frozenset(t.strip().lower() for t in terms if t.strip())
        stems = frozenset(stemmer.stem(w) for w in words)
        return cls(words=words, stems=stems)

    @classmethod
    def from_file(cls, path: str | Path, stemmer: Stemmer | None = None) -> "Stopwords":
        """Load one term per line; blank lines and '#' comments are skipped."""
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        terms = [ln for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
        return cls.from_terms(terms, stemmer)

    @classmethod
    def default(cls, stemmer: Stemmer | None = None) -> "Stopwords":
        """Bundled default English list."""
        text = resources.files("weaksignals").joinpath("data/stopwords.txt").read_text("utf-8")
        terms = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        return cls.from_terms(terms, stemmer)

    def merged_with(self, other: "Stopwords") -> "Stopwords":
        return Stopwords(words=self.words | other.words, stems=self.stems | other.stems)

    def is_stop_token(self, surface: str, stem: str) -> bool:
        return surface in self.words or stem in self.stems

    def is_stop_stem(self, stem: str) -> bool:
        return stem in self.stems or stem in self.words

    def __len__(self) -> int:
        return len(self.words)


def load_stopwords(path: str | Path | None, stemmer: Stemmer | None = None,
                   include_default: bool = True) -> Stopwords:
    """Default list merged with an optional user-supplied file."""
    base = Stopwords.default(stemmer) if include_default else Stopwords()
    if path is None:
        return base
    return base.merged_with(Stopwords.from_file(path, stemmer))
