"""Command-line interface: exit codes, overrides, and emitted files."""

from __future__ import annotations

import subprocess
from pathlib import Path

import pytest

from weaksignals.cli import EXIT_CONFIG, EXIT_INPUT, EXIT_OK, EXIT_STAGE, entrypoint

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_args(tmp_path, command="run", *extra):
    return [
        command,
        "--input", str(FIXTURES / "fixture_corpus.csv"),
        "--output-dir", str(tmp_path / "out"),
        "--top-k", "40",
        "--max-n", "2",
        "--stopwords", str(FIXTURES / "fixture_stopwords.txt"),
        "--annotations", str(FIXTURES / "fixture_annotations.csv"),
        *extra,
    ]


def out_names(tmp_path):
    return {p.name for p in (tmp_path / "out").iterdir()}


class TestSuccessfulRuns:
    def test_full_run_reports_and_exits_zero(self, tmp_path, capsys):
        assert entrypoint(fixture_args(tmp_path)) == EXIT_OK
        captured = capsys.readouterr()
        assert "documents: 229 (out of range: 1)" in captured.out
        assert "wrote 21 files to" in captured.out
        assert "manifest.json" in out_names(tmp_path)
        assert "signals.csv" in out_names(tmp_path)

    def test_ingest_subcommand_writes_only_ingest_files(self, tmp_path):
        assert entrypoint(fixture_args(tmp_path, "ingest")) == EXIT_OK
        assert out_names(tmp_path) == {
            "ingest_summary.json",
            "corpus.csv",
            "annual_counts.csv",
            "summary.txt",
            "manifest.json",
        }

    def test_graph_subcommand_skips_the_signal_files(self, tmp_path):
        assert entrypoint(fixture_args(tmp_path, "graph")) == EXIT_OK
        names = out_names(tmp_path)
        assert "graph_edges.csv" in names
        assert "signals.csv" not in names

    def test_no_graph_flag_drops_the_graph_outputs(self, tmp_path):
        assert entrypoint(fixture_args(tmp_path, "run", "--no-graph")) == EXIT_OK
        names = out_names(tmp_path)
        assert "graph_edges.csv" not in names
        assert "signals.csv" in names

    def test_verbose_flag_still_succeeds(self, tmp_path):
        assert entrypoint(fixture_args(tmp_path, "ingest", "--verbose")) == EXIT_OK


class TestConfigFile:
    def write_config(self, tmp_path, **extra):
        lines = [
            f"inputs: [{(FIXTURES / 'fixture_corpus.csv').as_posix()}]",
            f"output_dir: {(tmp_path / 'out').as_posix()}",
            f"stopwords_path: {(FIXTURES / 'fixture_stopwords.txt').as_posix()}",
            "top_k: 40",
            "max_n: 2",
        ]
        lines += [f"{key}: {value}" for key, value in extra.items()]
        path = tmp_path / "config.yaml"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    def test_run_from_config_file_alone(self, tmp_path):
        path = self.write_config(tmp_path)
        assert entrypoint(["signals", "--config", str(path)]) == EXIT_OK
        assert "map_kem_p1.csv" in out_names(tmp_path)

    def test_flags_override_the_config_file(self, tmp_path):
        path = self.write_config(tmp_path)
        code = entrypoint(["extract", "--config", str(path), "--top-k", "3"])
        assert code == EXIT_OK
        rows = (tmp_path / "out" / "keywords.csv").read_text().splitlines()[1:]
        ranks = {int(row.split(",")[1]) for row in rows}
        assert max(ranks) == 3

    def test_unknown_config_key_exits_one(self, tmp_path, capsys):
        path = tmp_path / "config.yaml"
        path.write_text("colour: red\n", encoding="utf-8")
        assert entrypoint(["run", "--config", str(path)]) == EXIT_CONFIG
        assert "configuration error" in capsys.readouterr().err


class TestFailureExitCodes:
    def test_usage_error_exits_one(self, capsys):
        assert entrypoint(["run", "--nonsense"]) == EXIT_CONFIG
        assert "error:" in capsys.readouterr().err

    def test_missing_subcommand_exits_one(self):
        assert entrypoint([]) == EXIT_CONFIG

    def test_bad_choice_exits_one(self, tmp_path):
        assert entrypoint(fixture_args(tmp_path, "run", "--format", "xml")) == EXIT_CONFIG

    def test_invalid_time_weight_exits_one(self, tmp_path, capsys):
        code = entrypoint(fixture_args(tmp_path, "run", "--time-weight", "0.1"))
        assert code == EXIT_CONFIG
        assert "time_weight" in capsys.readouterr().err

    def test_missing_input_exits_two(self, tmp_path, capsys):
        code = entrypoint(
            ["run", "--input", "no-such.csv", "--output-dir", str(tmp_path / "out")]
        )
        assert code == EXIT_INPUT
        assert "input error" in capsys.readouterr().err

    def test_malformed_input_exits_two(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("id,wrong\n1,x\n", encoding="utf-8")
        code = entrypoint(
            ["run", "--input", str(bad), "--output-dir", str(tmp_path / "out")]
        )
        assert code == EXIT_INPUT

    def test_stage_failure_exits_three(self, tmp_path, capsys):
        code = entrypoint(fixture_args(tmp_path, "run", "--start-year", "2050"))
        assert code == EXIT_STAGE
        assert "pipeline error" in capsys.readouterr().err

    def test_failed_runs_leave_no_partial_outputs(self, tmp_path):
        entrypoint(fixture_args(tmp_path, "run", "--start-year", "2050"))
        assert not (tmp_path / "out").exists()


class TestConsoleScript:
    def test_installed_entry_point_shows_help(self):
        proc = subprocess.run(
            ["weaksignals", "--help"], capture_output=True, text=True, timeout=60
        )
        assert proc.returncode == 0
        assert "ingest" in proc.stdout
        assert "run" in proc.stdout

    def test_installed_entry_point_runs_the_pipeline(self, tmp_path):
        proc = subprocess.run(
            [
                "weaksignals",
                *fixture_args(tmp_path, "ingest"),
            ],
            capture_output=True,
            text=True,
            timeout=120,
        )
        assert proc.returncode == 0, proc.stderr
        assert "documents: 229" in proc.stdout
