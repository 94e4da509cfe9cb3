"""Command-line interface.

Each subcommand runs the pipeline up to a stage boundary: `ingest` stops
after corpus loading, `extract` after keyword selection, `signals` after the
map intersection, `evolve` after trajectory queries, `graph` after community
detection, and `run` executes everything. Options come from an optional YAML
config file with command-line flags taking precedence.

Exit codes: 0 success, 1 configuration problem (including usage errors),
2 unreadable or invalid input files, 3 failure inside a pipeline stage.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Sequence

from .config import EMBED_URL_ENV, ConfigError, PipelineConfig
from .corpus import IngestError
from .pipeline import STAGE_SETS, StageError, run_pipeline

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INPUT = 2
EXIT_STAGE = 3

_COMMANDS = tuple(STAGE_SETS)


class _Parser(argparse.ArgumentParser):
    """Parser whose usage errors surface as configuration errors."""

    def error(self, message: str):
        raise ConfigError(message)


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="YAML config file")
    common.add_argument(
        "--input",
        dest="inputs",
        metavar="FILE",
        action="append",
        help="corpus file (repeatable); csv or jsonl",
    )
    common.add_argument(
        "--format",
        dest="input_format",
        choices=("csv", "jsonl"),
        help="force the input format instead of inferring from the suffix",
    )
    common.add_argument("--output-dir", metavar="DIR", help="report directory")
    common.add_argument("--start-year", type=int, help="first year of the horizon")
    common.add_argument("--window-years", type=int, help="years per interval")
    common.add_argument(
        "--intervals", dest="interval_count", type=int, help="number of intervals"
    )
    common.add_argument(
        "--period-size", type=int, help="intervals per period (must divide the count)"
    )
    common.add_argument(
        "--extractor", choices=("statistical", "embedding"), help="keyword extractor"
    )
    common.add_argument("--top-k", type=int, help="keywords kept per interval")
    common.add_argument("--max-n", type=int, help="longest keyword phrase in tokens")
    common.add_argument(
        "--stopwords", dest="stopwords_path", metavar="FILE", help="extra stopword list"
    )
    common.add_argument("--stemmer", help="stemmer name (porter or none)")
    common.add_argument(
        "--time-weight", type=float, help="per-interval recency discount w"
    )
    common.add_argument("--epsilon", type=float, help="zero-count smoothing factor")
    common.add_argument(
        "--normalize-x",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="normalize map x-values by interval document counts",
    )
    common.add_argument("--min-degree", type=int, help="drop keyword nodes below this degree")
    common.add_argument("--seed", type=int, help="community detection seed")
    common.add_argument("--resolution", type=float, help="community detection resolution")
    common.add_argument(
        "--embed-url",
        metavar="URL",
        help=f"embedding service base URL (or set {EMBED_URL_ENV})",
    )
    common.add_argument(
        "--vectors", dest="vectors_path", metavar="FILE", help="precomputed vector JSONL"
    )
    common.add_argument("--embed-batch-size", type=int, help="texts per embedding request")
    common.add_argument(
        "--annotations",
        dest="annotations_path",
        metavar="FILE",
        help="keyword category annotations CSV",
    )
    common.add_argument(
        "-v", "--verbose", action="store_true", help="debug logging on stderr"
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = _Parser(
        prog="weaksignals",
        description="Detect weak and strong signals in a publication corpus.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "ingest": "load, clean and deduplicate the corpus",
        "extract": "rank and select keywords per interval",
        "signals": "build portfolio maps and intersect them",
        "evolve": "trace labels across periods and run trajectory queries",
        "graph": "build the interval-keyword graph and detect communities",
        "run": "execute the full pipeline",
    }
    for command in _COMMANDS:
        sub = subparsers.add_parser(
            command, parents=[common], help=descriptions[command]
        )
        if command == "run":
            sub.add_argument(
                "--graph",
                dest="include_graph",
                action=argparse.BooleanOptionalAction,
                default=None,
                help="include or skip the graph stage",
            )
    return parser


_OVERRIDE_FIELDS = (
    "inputs",
    "input_format",
    "output_dir",
    "start_year",
    "window_years",
    "interval_count",
    "period_size",
    "extractor",
    "top_k",
    "max_n",
    "stopwords_path",
    "stemmer",
    "time_weight",
    "epsilon",
    "normalize_x",
    "min_degree",
    "seed",
    "resolution",
    "embed_url",
    "vectors_path",
    "embed_batch_size",
    "annotations_path",
    "include_graph",
)


def entrypoint(argv: Sequence[str] | None = None) -> int:
    """Console-script entry; returns the process exit code."""
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = (
            PipelineConfig.from_file(args.config)
            if args.config
            else PipelineConfig()
        )
        overrides = {
            name: getattr(args, name)
            for name in _OVERRIDE_FIELDS
            if getattr(args, name, None) is not None
        }
        cfg = cfg.merged(**overrides)
        result = run_pipeline(cfg, command=args.command)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IngestError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except StageError as exc:
        print(f"pipeline error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    sys.stdout.write(result.files["summary.txt"].decode("utf-8"))
    print(f"wrote {len(result.files)} files to {cfg.output_dir}")
    return EXIT_OK


def main() -> None:  # pragma: no cover - thin wrapper
    raise SystemExit(entrypoint())


if __name__ == "__main__":  # pragma: no cover
    main()
