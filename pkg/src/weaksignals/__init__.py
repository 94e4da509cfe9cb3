"""Weak-signal detection in time-stamped publication corpora.

The pipeline ingests bibliographic records, splits the horizon into fixed
year intervals, extracts ranked keywords per interval, scores visibility and
diffusion with a time-weighted normalization, classifies keywords on
median-split portfolio maps, intersects the two maps into signals, traces
label trajectories across periods, and analyzes the interval-keyword graph
with seeded community detection.
"""

__version__ = "0.1.0"

from .config import ConfigError, PipelineConfig, validate_config
from .corpus import (
    Corpus,
    IngestError,
    IngestionSummary,
    IntervalScheme,
    PublicationRecord,
    assign_intervals,
    ingest_corpus,
)
from .detector import WeakSignalDetector
from .embeddings import (
    EmbeddingError,
    EmbeddingVector,
    HttpEmbeddingClient,
    JsonlVectorStore,
)
from .evolution import (
    CategoryAnnotation,
    EvolutionError,
    EvolutionTrace,
    build_traces,
    category_coverage,
    load_annotations,
    query_constant,
    query_conversions,
    query_new_emergers,
    query_sinusoidal,
)
from .extract import (
    Candidate,
    ExtractionError,
    KeywordScore,
    KeywordSet,
    extract_keywords,
    extract_top_k,
    generate_candidates,
    rank_by_cosine,
    score_statistical,
)
from .graph import (
    BipartiteGraph,
    GraphError,
    Partition,
    build_bipartite,
    degree_distribution,
    filter_min_degree,
    louvain_detect,
    modularity,
)
from .pipeline import PipelineResult, StageError, execute, run_pipeline
from .signals import (
    FrequencyTable,
    MapPoint,
    PortfolioMap,
    SignalError,
    SignalLabel,
    SignalTable,
    build_map,
    build_signal_table,
    compute_score,
    count_frequencies,
    growth_geomean,
    intersect_maps,
)
from .text import PorterStemmer, Stopwords, load_stopwords, make_stemmer, normalize_text, tokenize

__all__ = [
    "__version__",
    "BipartiteGraph",
    "Candidate",
    "CategoryAnnotation",
    "ConfigError",
    "Corpus",
    "EmbeddingError",
    "EmbeddingVector",
    "EvolutionError",
    "EvolutionTrace",
    "ExtractionError",
    "FrequencyTable",
    "GraphError",
    "HttpEmbeddingClient",
    "IngestError",
    "IngestionSummary",
    "IntervalScheme",
    "JsonlVectorStore",
    "KeywordScore",
    "KeywordSet",
    "MapPoint",
    "Partition",
    "PipelineConfig",
    "PipelineResult",
    "PortfolioMap",
    "PorterStemmer",
    "PublicationRecord",
    "SignalError",
    "SignalLabel",
    "SignalTable",
    "StageError",
    "Stopwords",
    "WeakSignalDetector",
    "assign_intervals",
    "build_bipartite",
    "build_map",
    "build_signal_table",
    "build_traces",
    "category_coverage",
    "compute_score",
    "count_frequencies",
    "degree_distribution",
    "execute",
    "extract_keywords",
    "extract_top_k",
    "filter_min_degree",
    "generate_candidates",
    "growth_geomean",
    "ingest_corpus",
    "intersect_maps",
    "load_annotations",
    "load_stopwords",
    "louvain_detect",
    "make_stemmer",
    "modularity",
    "normalize_text",
    "query_constant",
    "query_conversions",
    "query_new_emergers",
    "query_sinusoidal",
    "rank_by_cosine",
    "run_pipeline",
    "score_statistical",
    "tokenize",
    "validate_config",
]
