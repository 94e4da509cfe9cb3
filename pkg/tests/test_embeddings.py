"""Vector containers and the two embedding providers (JSONL file, HTTP)."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from weaksignals.embeddings import (
    EmbeddingError,
    EmbeddingVector,
    HttpEmbeddingClient,
    JsonlVectorStore,
)


class TestEmbeddingVector:
    def test_values_are_coerced_to_float64(self):
        vec = EmbeddingVector(key="a", values=[1, 2, 3])
        assert vec.values.dtype == np.float64
        assert vec.dim == 3
        assert vec.norm == pytest.approx(np.sqrt(14.0))

    def test_two_dimensional_input_rejected(self):
        with pytest.raises(EmbeddingError):
            EmbeddingVector(key="a", values=[[1.0, 2.0]])

    def test_empty_input_rejected(self):
        with pytest.raises(EmbeddingError):
            EmbeddingVector(key="a", values=[])


class TestJsonlVectorStore:
    @staticmethod
    def write(tmp_path, lines):
        path = tmp_path / "vectors.jsonl"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    def test_lookup_ignores_texts_and_skips_unknown_keys(self, tmp_path):
        path = self.write(
            tmp_path,
            [
                json.dumps({"key": "a", "vector": [1.0, 0.0]}),
                json.dumps({"key": "b", "vector": [0.0, 1.0]}),
            ],
        )
        store = JsonlVectorStore(path)
        assert len(store) == 2
        result = store.vectors([("a", "some text"), ("missing", "other text")])
        assert set(result) == {"a"}
        assert result["a"].values.tolist() == [1.0, 0.0]

    def test_last_duplicate_key_wins(self, tmp_path):
        path = self.write(
            tmp_path,
            [
                json.dumps({"key": "a", "vector": [1.0]}),
                json.dumps({"key": "a", "vector": [2.0]}),
            ],
        )
        store = JsonlVectorStore(path)
        assert len(store) == 1
        assert store.vectors([("a", "")])["a"].values.tolist() == [2.0]

    def test_blank_lines_are_skipped(self, tmp_path):
        path = self.write(tmp_path, [json.dumps({"key": "a", "vector": [1.0]}), "", "  "])
        assert len(JsonlVectorStore(path)) == 1

    def test_malformed_json_reports_the_line_number(self, tmp_path):
        path = self.write(
            tmp_path,
            [json.dumps({"key": "a", "vector": [1.0]}), "{not json"],
        )
        with pytest.raises(EmbeddingError, match=":2:"):
            JsonlVectorStore(path)

    def test_missing_vector_field_rejected(self, tmp_path):
        path = self.write(tmp_path, [json.dumps({"key": "a", "values": [1.0]})])
        with pytest.raises(EmbeddingError):
            JsonlVectorStore(path)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(EmbeddingError):
            JsonlVectorStore(tmp_path / "nope.jsonl")


class _EmbedHandler(BaseHTTPRequestHandler):
    """Stub endpoint: each text maps to [len(text), 1.0]."""

    def log_message(self, *args):  # keep test output quiet
        pass

    def do_POST(self):
        state = self.server.state
        length = int(self.headers.get("Content-Length", "0"))
        payload = json.loads(self.rfile.read(length))
        state["paths"].append(self.path)
        state["bodies"].append(payload)
        if state["failures"] > 0:
            state["failures"] -= 1
            self.send_response(500)
            self.end_headers()
            return
        vectors = [[float(len(t)), 1.0] for t in payload["texts"]]
        if state["drop_one"]:
            vectors = vectors[:-1]
        body = json.dumps({"vectors": vectors}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


@pytest.fixture()
def embed_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _EmbedHandler)
    server.state = {"paths": [], "bodies": [], "failures": 0, "drop_one": False}
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield server
    finally:
        server.shutdown()
        thread.join(timeout=5)
        server.server_close()


def server_url(server):
    host, port = server.server_address
    return f"http://{host}:{port}"


class TestHttpEmbeddingClient:
    def test_requests_are_batched(self, embed_server):
        client = HttpEmbeddingClient(server_url(embed_server), batch_size=2)
        items = [(f"k{i}", "x" * (i + 1)) for i in range(5)]
        result = client.vectors(items)
        assert len(embed_server.state["paths"]) == 3
        assert all(path == "/embed" for path in embed_server.state["paths"])
        sent = [body["texts"] for body in embed_server.state["bodies"]]
        assert sent == [["x", "xx"], ["xxx", "xxxx"], ["xxxxx"]]
        assert set(result) == {f"k{i}" for i in range(5)}
        assert result["k2"].values.tolist() == [3.0, 1.0]

    def test_url_already_ending_in_embed_is_not_doubled(self, embed_server):
        url = server_url(embed_server)
        assert HttpEmbeddingClient(url).endpoint == url + "/embed"
        assert HttpEmbeddingClient(url + "/").endpoint == url + "/embed"
        assert HttpEmbeddingClient(url + "/embed").endpoint == url + "/embed"

    def test_transient_failures_are_retried(self, embed_server):
        embed_server.state["failures"] = 2
        client = HttpEmbeddingClient(
            server_url(embed_server), max_attempts=3, backoff=0.001
        )
        result = client.vectors([("a", "hi")])
        assert result["a"].values.tolist() == [2.0, 1.0]
        assert len(embed_server.state["paths"]) == 3

    def test_persistent_failure_exhausts_attempts(self, embed_server):
        embed_server.state["failures"] = 99
        client = HttpEmbeddingClient(
            server_url(embed_server), max_attempts=3, backoff=0.001
        )
        with pytest.raises(EmbeddingError, match="after 3 attempts"):
            client.vectors([("a", "hi")])
        assert len(embed_server.state["paths"]) == 3

    def test_vector_count_mismatch_rejected(self, embed_server):
        embed_server.state["drop_one"] = True
        client = HttpEmbeddingClient(server_url(embed_server), backoff=0.001)
        with pytest.raises(EmbeddingError, match="1 vectors for 2 texts"):
            client.vectors([("a", "hi"), ("b", "ho")])

    def test_no_items_means_no_requests(self, embed_server):
        client = HttpEmbeddingClient(server_url(embed_server))
        assert client.vectors([]) == {}
        assert embed_server.state["paths"] == []

    def test_invalid_construction_parameters(self):
        with pytest.raises(ValueError):
            HttpEmbeddingClient("http://example.invalid", batch_size=0)
        with pytest.raises(ValueError):
            HttpEmbeddingClient("http://example.invalid", max_attempts=0)
