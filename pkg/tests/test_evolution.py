"""Trajectory traces, pattern queries, annotations, and category coverage."""

from __future__ import annotations

import pytest

from weaksignals.evolution import (
    EvolutionError,
    EvolutionTrace,
    build_traces,
    category_coverage,
    load_annotations,
    pattern_flags,
    query_constant,
    query_conversions,
    query_new_emergers,
    query_sinusoidal,
)
from weaksignals.signals import PeriodSignals, SignalEntry, SignalLabel, SignalTable
from weaksignals.text import make_stemmer

W = SignalLabel.WEAK
S = SignalLabel.STRONG
K = SignalLabel.WELL_KNOWN
L = SignalLabel.LATENT
U = SignalLabel.UNCLASSIFIED


def trace(keyword, *labels):
    return EvolutionTrace(keyword=keyword, labels=tuple(labels))


def entry(keyword, label):
    return SignalEntry(
        keyword=keyword,
        label=label,
        is_signal=label.is_signal,
        kem_x=1.0,
        kem_y=1.0,
        kim_x=1.0,
        kim_y=1.0,
    )


def period_of(index, labels, extra_included=(), excluded=()):
    return PeriodSignals(
        period=index,
        entries={k: entry(k, v) for k, v in labels.items()},
        included=tuple(sorted(set(labels) | set(extra_included))),
        excluded=tuple(excluded),
    )


def table_of(*period_labels):
    return SignalTable(
        periods=tuple(
            period_of(i, labels) if isinstance(labels, dict) else labels
            for i, labels in enumerate(period_labels, start=1)
        )
    )


class TestBuildTraces:
    def test_missing_periods_become_unclassified(self):
        table = table_of(
            period_of(1, {"a": W, "b": L}, extra_included=("c",)),
            period_of(2, {"a": S}),
        )
        traces = {t.keyword: t for t in build_traces(table)}
        assert set(traces) == {"a", "b", "c"}
        assert traces["a"].labels == (W, S)
        assert traces["b"].labels == (L, U)  # excluded from the later maps
        assert traces["c"].labels == (U, U)  # included but never agreed

    def test_traces_are_sorted_and_span_the_horizon(self):
        table = table_of({"z": W, "a": S}, {"z": W, "a": S}, {"z": W, "a": S})
        traces = build_traces(table)
        assert [t.keyword for t in traces] == ["a", "z"]
        assert all(len(t) == 3 for t in traces)
        assert traces[1].label_in(2) is W


class TestQueryConversions:
    def test_adjacent_weak_to_strong_is_reported_with_both_periods(self):
        hits = query_conversions([trace("x", W, S), trace("y", W, L, W, S)])
        assert hits == [("x", 1, 2), ("y", 3, 4)]

    def test_each_transition_counts_separately(self):
        assert query_conversions([trace("x", W, S, W, S)]) == [("x", 1, 2), ("x", 3, 4)]

    def test_reverse_transition_is_not_a_conversion(self):
        assert query_conversions([trace("x", S, W)]) == []

    def test_gap_between_weak_and_strong_does_not_count(self):
        assert query_conversions([trace("x", W, U, S)]) == []


class TestQueryNewEmergers:
    def test_weak_debut_with_quiet_history_qualifies(self):
        traces = [trace("a", U, W), trace("b", L, W), trace("c", U, U)]
        assert query_new_emergers(traces, 2) == ["a", "b"]

    def test_any_earlier_signal_disqualifies(self):
        traces = [
            trace("w", W, L, W),
            trace("s", S, L, W),
            trace("k", K, L, W),
            trace("q", L, U, W),
        ]
        assert query_new_emergers(traces, 3) == ["q"]

    def test_keyword_must_be_weak_in_the_target_period(self):
        assert query_new_emergers([trace("a", U, S)], 2) == []

    def test_target_below_two_rejected(self):
        with pytest.raises(EvolutionError):
            query_new_emergers([trace("a", W, W)], 1)

    def test_target_beyond_the_horizon_rejected(self):
        with pytest.raises(EvolutionError):
            query_new_emergers([trace("a", W, W)], 3)


class TestQueryConstant:
    def test_only_uniform_traces_match(self):
        traces = [trace("a", W, W, W), trace("b", W, S, W), trace("c", L, L, L)]
        assert query_constant(traces, W) == ["a"]
        assert query_constant(traces, L) == ["c"]
        assert query_constant(traces, S) == []


class TestQuerySinusoidal:
    def test_both_alternation_shapes_match(self):
        assert query_sinusoidal([trace("a", W, S, W)]) == ["a"]
        assert query_sinusoidal([trace("b", S, W, S)]) == ["b"]

    def test_window_must_be_consecutive(self):
        assert query_sinusoidal([trace("a", W, S, U, W)]) == []
        assert query_sinusoidal([trace("b", W, S, S, W)]) == []

    def test_window_anywhere_in_a_longer_trace_matches_once(self):
        assert query_sinusoidal([trace("a", L, W, S, W, S)]) == ["a"]


class TestPatternFlags:
    def test_conversion_flag(self):
        assert pattern_flags(trace("a", W, S)) == "conversion"

    def test_constant_flag_names_the_label(self):
        assert pattern_flags(trace("a", K, K)) == "constant-well-known"
        assert pattern_flags(trace("b", L, L, L)) == "constant-latent"

    def test_combined_flags_are_semicolon_joined(self):
        assert pattern_flags(trace("a", W, S, W)) == "conversion;sinusoidal"

    def test_unremarkable_trace_has_no_flags(self):
        assert pattern_flags(trace("a", U, L, U)) == ""


class TestLoadAnnotations:
    @staticmethod
    def write(tmp_path, text):
        path = tmp_path / "annotations.csv"
        path.write_text(text, encoding="utf-8")
        return path

    def test_keywords_are_stemmed_for_joining(self, tmp_path):
        path = self.write(
            tmp_path,
            "keyword,category,abbrev\nLasers,devices,d\nLaser Grids,devices,d\n",
        )
        annotations = load_annotations(path)
        assert set(annotations) == {"laser", "laser grid"}
        assert annotations["laser"].category == "devices"
        assert annotations["laser grid"].abbreviation == "d"

    def test_identity_stemmer_keeps_surface_forms(self, tmp_path):
        path = self.write(tmp_path, "keyword,category,abbrev\nLasers,devices,d\n")
        annotations = load_annotations(path, stemmer=make_stemmer("none"))
        assert set(annotations) == {"lasers"}

    def test_missing_columns_rejected(self, tmp_path):
        path = self.write(tmp_path, "keyword,group\nlaser,devices\n")
        with pytest.raises(EvolutionError, match="columns"):
            load_annotations(path)

    def test_conflicting_categories_rejected(self, tmp_path):
        path = self.write(
            tmp_path,
            "keyword,category,abbrev\nlaser,devices,d\nlasers,materials,m\n",
        )
        with pytest.raises(EvolutionError, match="conflicting"):
            load_annotations(path)

    def test_repeated_agreeing_rows_are_fine(self, tmp_path):
        path = self.write(
            tmp_path,
            "keyword,category,abbrev\nlaser,devices,d\nlaser,devices,d\n",
        )
        assert len(load_annotations(path)) == 1

    def test_empty_keyword_rejected(self, tmp_path):
        path = self.write(tmp_path, "keyword,category,abbrev\n'',devices,d\n")
        with pytest.raises(EvolutionError, match="empty keyword"):
            load_annotations(path)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(EvolutionError, match="cannot read"):
            load_annotations(tmp_path / "nope.csv")


def annotation_map(**categories):
    from weaksignals.evolution import CategoryAnnotation

    return {
        stem: CategoryAnnotation(keyword=stem, category=cat, abbreviation=cat[0])
        for stem, cat in categories.items()
    }


class TestCategoryCoverage:
    def table(self):
        return table_of({"a": W, "b": W, "c": S, "d": L, "e": K})

    def annotations(self):
        return annotation_map(a="gases", b="materials", c="gases", d="gases", f="gases")

    def test_all_kind_covers_every_signal_label(self):
        report = category_coverage(self.table(), self.annotations())
        cell = report.cell(1, "all")
        # a, b, c and e are signals; latent d is not. e has no annotation.
        assert cell.counts == {"gases": 2, "materials": 1}
        assert cell.uncategorized == 1
        assert cell.annotated_total == 3
        assert cell.percentages["gases"] == pytest.approx(200.0 / 3.0)
        assert sum(cell.percentages.values()) == pytest.approx(100.0, abs=1e-9)

    def test_weak_and_strong_kinds_filter_by_label(self):
        report = category_coverage(self.table(), self.annotations())
        weak = report.cell(1, "weak")
        assert weak.counts == {"gases": 1, "materials": 1}
        assert weak.percentages == {"gases": 50.0, "materials": 50.0}
        strong = report.cell(1, "strong")
        assert strong.counts == {"gases": 1}
        assert strong.percentages == {"gases": 100.0}

    def test_single_category_cell_is_exactly_one_hundred(self):
        table = table_of({"a": W, "b": W})
        report = category_coverage(table, annotation_map(a="gases", b="gases"))
        assert report.cell(1, "weak").percentages == {"gases": 100.0}

    def test_empty_cell_has_no_percentages(self):
        table = table_of({"a": L, "b": L})
        report = category_coverage(table, annotation_map(a="gases"))
        cell = report.cell(1, "strong")
        assert cell.counts == {}
        assert cell.percentages == {}
        assert cell.annotated_total == 0
        assert cell.uncategorized == 0

    def test_every_period_and_kind_gets_a_cell(self):
        table = table_of({"a": W, "b": S}, {"a": W, "b": S})
        report = category_coverage(table, annotation_map(a="gases", b="gases"))
        assert len(report.cells) == 6
        with pytest.raises(KeyError):
            report.cell(3, "weak")
