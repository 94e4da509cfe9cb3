"""Pipeline configuration: defaults, YAML loading, overrides, validation."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping

import yaml

from .corpus import IntervalScheme
from .extract import EXTRACTORS
from .text import STEMMERS

EMBED_URL_ENV = "WEAKSIGNALS_EMBED_URL"


class ConfigError(Exception):
    """Unreadable, unknown, or out-of-range configuration."""


@dataclass(frozen=True)
class PipelineConfig:
    """Everything the pipeline needs, flat so CLI flags map one-to-one."""

    inputs: tuple[str, ...] = ()
    input_format: str | None = None
    output_dir: str = "out"
    start_year: int = 1985
    window_years: int = 3
    interval_count: int = 12
    period_size: int = 4
    extractor: str = "statistical"
    top_k: int = 500
    max_n: int = 3
    stopwords_path: str | None = None
    stemmer: str = "porter"
    time_weight: float = 0.05
    epsilon: float = 0.5
    normalize_x: bool = False
    min_degree: int = 0
    seed: int = 0
    resolution: float = 1.0
    embed_url: str | None = None
    vectors_path: str | None = None
    embed_batch_size: int = 32
    annotations_path: str | None = None
    include_graph: bool = True

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> "PipelineConfig":
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(mapping) - set(known))
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        values: dict[str, Any] = {}
        for name, value in mapping.items():
            if name == "inputs":
                if isinstance(value, (str, Path)):
                    value = (str(value),)
                elif isinstance(value, (list, tuple)):
                    value = tuple(str(v) for v in value)
                else:
                    raise ConfigError("inputs must be a path or a list of paths")
            values[name] = value
        try:
            return cls(**values)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        try:
            with open(path, encoding="utf-8") as handle:
                data = yaml.safe_load(handle)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
        if data is None:
            data = {}
        if not isinstance(data, Mapping):
            raise ConfigError(f"{path}: top level must be a mapping")
        return cls.from_mapping(data)

    def merged(self, **overrides: Any) -> "PipelineConfig":
        """New config with the given non-None overrides applied."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        if "inputs" in changes:
            value = changes["inputs"]
            if isinstance(value, (str, Path)):
                changes["inputs"] = (str(value),)
            else:
                changes["inputs"] = tuple(str(v) for v in value)
        unknown = sorted(set(changes) - {f.name for f in fields(self)})
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        return dataclasses.replace(self, **changes)

    def scheme(self) -> IntervalScheme:
        return IntervalScheme(
            start_year=self.start_year,
            window_years=self.window_years,
            interval_count=self.interval_count,
            period_size=self.period_size,
        )

    def resolved_embed_url(self) -> str | None:
        """Configured URL, falling back to the environment variable."""
        return self.embed_url or os.environ.get(EMBED_URL_ENV) or None

    def as_dict(self) -> dict[str, Any]:
        data = dataclasses.asdict(self)
        data["inputs"] = list(self.inputs)
        return data


def validate_config(
    cfg: PipelineConfig,
    require_inputs: bool = True,
    require_embedding_source: bool = True,
) -> list[str]:
    """All problems with the configuration, empty when it is usable.

    `require_inputs` is off when the corpus arrives in memory;
    `require_embedding_source` is off when a vector provider is injected.
    """
    problems: list[str] = []
    if require_inputs and not cfg.inputs:
        problems.append("no input files configured")
    if cfg.input_format is not None and cfg.input_format not in ("csv", "jsonl"):
        problems.append(f"unknown input_format {cfg.input_format!r} (csv or jsonl)")
    if cfg.window_years < 1:
        problems.append("window_years must be >= 1")
    if cfg.interval_count < 2:
        problems.append("interval_count must be >= 2")
    if cfg.period_size < 2:
        problems.append("period_size must be >= 2")
    elif cfg.interval_count >= 2 and cfg.interval_count % cfg.period_size != 0:
        problems.append(
            f"period_size {cfg.period_size} must divide interval_count {cfg.interval_count}"
        )
    if cfg.extractor not in EXTRACTORS:
        problems.append(f"unknown extractor {cfg.extractor!r} (one of {EXTRACTORS})")
    if cfg.stemmer not in STEMMERS:
        problems.append(f"unknown stemmer {cfg.stemmer!r} (one of {tuple(STEMMERS)})")
    if cfg.top_k < 1:
        problems.append("top_k must be >= 1")
    if cfg.max_n < 1:
        problems.append("max_n must be >= 1")
    if not 0.0 <= cfg.time_weight * (cfg.interval_count - 1) < 1.0:
        problems.append(
            f"time_weight {cfg.time_weight} with {cfg.interval_count} intervals "
            "leaves nonpositive interval weights"
        )
    if cfg.epsilon <= 0:
        problems.append("epsilon must be positive")
    if cfg.min_degree < 0:
        problems.append("min_degree must be >= 0")
    if cfg.resolution <= 0:
        problems.append("resolution must be positive")
    if cfg.embed_batch_size < 1:
        problems.append("embed_batch_size must be >= 1")
    if cfg.extractor == "embedding":
        has_url = bool(cfg.resolved_embed_url())
        has_store = bool(cfg.vectors_path)
        if has_url and has_store:
            problems.append("configure either vectors_path or embed_url, not both")
        if require_embedding_source and not has_url and not has_store:
            problems.append(
                "embedding extractor needs vectors_path or embed_url "
                f"(or the {EMBED_URL_ENV} environment variable)"
            )
    return problems
