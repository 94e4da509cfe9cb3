import json
from pathlib import Path

import pytest

from weaksignals import PipelineConfig, execute

FIXTURES = Path(__file__).resolve().parent / "fixtures"


@pytest.fixture(scope="session")
def goldens() -> dict:
    return json.loads((FIXTURES / "fixture_goldens.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def fixture_config(tmp_path_factory) -> PipelineConfig:
    return PipelineConfig(
        inputs=(str(FIXTURES / "fixture_corpus.csv"),),
        output_dir=str(tmp_path_factory.mktemp("fixture-run")),
        top_k=40,
        max_n=2,
        stopwords_path=str(FIXTURES / "fixture_stopwords.txt"),
        annotations_path=str(FIXTURES / "fixture_annotations.csv"),
    )


@pytest.fixture(scope="session")
def fixture_result(fixture_config):
    """One shared full pipeline run over the bundled fixture corpus."""
    return execute(fixture_config, command="run")
