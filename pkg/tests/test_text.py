"""Tokenization, stemming and stopword handling."""

import pytest
from hypothesis import given, strategies as st

from weaksignals.text import (
    DEFAULT_STEMMER,
    PorterStemmer,
    Stopwords,
    load_stopwords,
    make_stemmer,
    normalize_text,
    tokenize,
)


class TestTokenize:
    def test_lowercases_and_splits_on_punctuation(self):
        assert tokenize("Shock-Wave/Boundary-Layer") == ["shock", "wave", "boundary", "layer"]

    def test_empty_input(self):
        assert tokenize("") == []
        assert tokenize("  \t\n") == []

    def test_underscores_and_digits(self):
        assert tokenize("foo_bar 42 baz") == ["foo", "bar", "42", "baz"]


class TestPorterStemmer:
    # frozen outputs of the suffix-stripper on words that matter downstream
    GOLDEN = {
        "microstructures": "microstructur",
        "microstructure": "microstructur",
        "boundary": "boundari",
        "generalizations": "gener",
        "oscillators": "oscil",
        "agreed": "agre",
        "caresses": "caress",
        "ponies": "poni",
        "relational": "relat",
        "adjustable": "adjust",
    }

    @pytest.mark.parametrize("word,stem", sorted(GOLDEN.items()))
    def test_frozen_stems(self, word, stem):
        assert PorterStemmer().stem(word) == stem

    def test_short_words_unchanged(self):
        stemmer = PorterStemmer()
        for word in ("a", "is", "do", "by"):
            assert stemmer.stem(word) == word

    def test_fixture_terms_are_fixed_points(self):
        stemmer = PorterStemmer()
        for term in ("plasma", "quartz", "radar", "argon", "helium", "cobalt",
                     "sensor", "rotor", "carbon", "foil", "flux", "xenon",
                     "laser", "grid", "vortex", "pylon", "prism"):
            assert stemmer.stem(term) == term

    @given(st.text(alphabet=st.characters(min_codepoint=97, max_codepoint=122), max_size=20))
    def test_never_grows_and_is_idempotent_on_lowercase(self, word):
        stemmer = PorterStemmer()
        stem = stemmer.stem(word)
        assert len(stem) <= len(word)
        assert stemmer.stem(stem) == stemmer.stem(stem)


class TestNormalizeText:
    def test_stems_and_lowercases(self):
        assert normalize_text("Microstructures") == ["microstructur"]

    def test_empty(self):
        assert normalize_text("") == []

    def test_multi_token(self):
        assert normalize_text("Shock-Wave/Boundary-Layer") == ["shock", "wave", "boundari", "layer"]


class TestStopwords:
    def test_default_list_contains_function_words(self):
        stops = Stopwords.default()
        assert stops.is_stop_token("the", DEFAULT_STEMMER.stem("the"))
        assert stops.is_stop_token("of", "of")
        assert not stops.is_stop_token("plasma", "plasma")

    def test_matches_surface_or_stem(self):
        stops = Stopwords.from_terms(["running"])
        # the stem of "running" is blocked too, so "runs" is caught via stem
        assert stops.is_stop_token("running", DEFAULT_STEMMER.stem("running"))
        assert stops.is_stop_token("runs", DEFAULT_STEMMER.stem("runs"))

    def test_file_loading_skips_comments(self, tmp_path):
        path = tmp_path / "stops.txt"
        path.write_text("# comment\nalpha\n\nbeta\n", encoding="utf-8")
        stops = load_stopwords(path, include_default=False)
        assert stops.is_stop_stem("alpha")
        assert stops.is_stop_stem("beta")
        assert not stops.is_stop_stem("the")

    def test_file_plus_default_merge(self, tmp_path):
        path = tmp_path / "stops.txt"
        path.write_text("alpha\n", encoding="utf-8")
        stops = load_stopwords(path)
        assert stops.is_stop_stem("alpha")
        assert stops.is_stop_stem("the")

    def test_missing_file_raises(self, tmp_path):
        with pytest.raises(OSError):
            load_stopwords(tmp_path / "absent.txt")


class TestMakeStemmer:
    def test_registry(self):
        assert make_stemmer("porter").stem("running") == "run"
        assert make_stemmer("none").stem("running") == "running"

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            make_stemmer("snowball-9000")
