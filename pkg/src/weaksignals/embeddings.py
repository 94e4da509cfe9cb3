"""Embedding vector providers.

Vectors are consumed, never computed here. Two transports:

* a JSONL file of ``{"key": ..., "vector": [...]}`` lines, keyed by document
  id or candidate stem;
* an HTTP service accepting ``POST <base>/embed`` with ``{"texts": [...]}``
  and answering ``{"vectors": [[...], ...]}``.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np
import requests

logger = logging.getLogger(__name__)


class EmbeddingError(Exception):
    """Unusable vector data or an exhausted provider."""


@dataclass(frozen=True)
class EmbeddingVector:
    key: str
    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise EmbeddingError(f"vector {self.key!r} must be a non-empty 1-D array")
        object.__setattr__(self, "values", arr)

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


class EmbeddingProvider(Protocol):
    """Maps (key, text) items to vectors keyed by the item key."""

    def vectors(self, items: Sequence[tuple[str, str]]) -> dict[str, EmbeddingVector]: ...


class JsonlVectorStore:
    """Read-only lookup over a JSONL vector file; texts are ignored.

    Duplicate keys are allowed; the last line wins. Keys absent from the
    file are simply missing from the result — the caller decides whether
    that is fatal.
    """

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._table: dict[str, EmbeddingVector] = {}
        try:
            with self.path.open(encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, 1):
                    if not line.strip():
                        continue
                    try:
                        obj = json.loads(line)
                        key = obj["key"]
                        vec = obj["vector"]
                    except (json.JSONDecodeError, KeyError, TypeError) as exc:
                        raise EmbeddingError(
                            f"{self.path}:{lineno}: expected {{'key', 'vector'}} object ({exc})"
                        ) from exc
                    self._table[str(key)] = EmbeddingVector(key=str(key), values=np.asarray(vec))
        except OSError as exc:
            raise EmbeddingError(f"cannot read vector file {self.path}: {exc}") from exc

    def __len__(self) -> int:
        return len(self._table)

    def vectors(self, items: Sequence[tuple[str, str]]) -> dict[str, EmbeddingVector]:
        return {key: self._table[key] for key, _ in items if key in self._table}


class HttpEmbeddingClient:
    """Batched client for an embedding endpoint, with bounded retries.

    Each batch is retried up to ``max_attempts`` times with exponential
    backoff; a still-failing batch raises EmbeddingError.
    """

    def __init__(
        self,
        url: str,
        batch_size: int = 32,
        max_attempts: int = 3,
        backoff: float = 0.5,
        timeout: float = 30.0,
        session: requests.Session | None = None,
    ) -> None:
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        base = url.rstrip("/")
        self.endpoint = base if base.endswith("/embed") else base + "/embed"
        self.batch_size = batch_size
        self.max_attempts = max_attempts
        self.backoff = backoff
        self.timeout = timeout
        self._session = session or requests.Session()

    def vectors(self, items: Sequence[tuple[str, str]]) -> dict[str, EmbeddingVector]:
        out: dict[str, EmbeddingVector] = {}
        for start in range(0, len(items), self.batch_size):
            batch = items[start : start + self.batch_size]
            rows = self._embed_batch([text for _, text in batch])
            if len(rows) != len(batch):
                raise EmbeddingError(
                    f"endpoint returned {len(rows)} vectors for {len(batch)} texts"
                )
            for (key, _), row in zip(batch, rows):
                out[key] = EmbeddingVector(key=key, values=np.asarray(row))
        return out

    def _embed_batch(self, texts: list[str]) -> list:
        last_error: Exception | None = None
        for attempt in range(1, self.max_attempts + 1):
            try:
                resp = self._session.post(
                    self.endpoint, json={"texts": texts}, timeout=self.timeout
                )
                resp.raise_for_status()
                payload = resp.json()
                return payload["vectors"]
            except (requests.RequestException, ValueError, KeyError) as exc:
                last_error = exc
                if attempt < self.max_attempts:
                    delay = self.backoff * 2 ** (attempt - 1)
                    logger.warning(
                        "embed request failed (attempt %d/%d): %s; retrying in %.2fs",
                        attempt, self.max_attempts, exc, delay,
                    )
                    time.sleep(delay)
        raise EmbeddingError(
            f"embedding endpoint failed after {self.max_attempts} attempts: {last_error}"
        ) from last_error
