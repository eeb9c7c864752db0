import itertools
import math

import pytest
from hypothesis import given, strategies as st

from cspscreen.names import (
    NameSimilarity,
    cosine,
    fit_vocabulary,
    match_names,
    normalize_name,
    trigrams,
    vectorize,
)

from conftest import REALISTIC_NAMES

ANCHOR_CORPUS = REALISTIC_NAMES + [
    "Sempter Fidelis B.V.", "Sempter Fidelis Beheer B.V.",
    "Vistra Management Services B.V.", "Vita Management Services B.V.",
]

name_strategy = st.text(
    alphabet=st.characters(whitelist_categories=("Lu", "Ll", "Nd"),
                           whitelist_characters=" .&-"),
    min_size=0, max_size=30)


class TestNormalization:
    def test_punctuation_and_case(self):
        assert normalize_name("Sempter  Fidelis B.V.") == " sempter fidelis b v "

    def test_empty(self):
        assert normalize_name("") == " "
        assert normalize_name("  .,&  ") == " "

    def test_short_name_padding_yields_trigrams(self):
        vocab = fit_vocabulary(["ab"])
        assert set(vocab.index) == {" ab", "ab "}

    @pytest.mark.parametrize("raw,expected", [
        ("Jan-Willem", " jan willem "),
        ("  O'Neill & Co.  ", " o neill co "),
        ("ACME 2000", " acme 2000 "),
        ("ünïcode Ştr", " ünïcode ştr "),
    ])
    def test_answer_key(self, raw, expected):
        assert normalize_name(raw) == expected


class TestVocabulary:
    def test_document_frequencies_match_brute_force(self):
        names = ANCHOR_CORPUS[:100]
        vocab = fit_vocabulary(names)
        # Independent tally: per trigram, count names containing it.
        for gram, df in vocab.document_frequencies.items():
            brute = sum(1 for n in names if gram in trigrams(normalize_name(n)))
            assert df == brute
        assert vocab.n_documents == 100
        assert sorted(vocab.index.values()) == list(range(len(vocab.index)))

    def test_duplicates_only_change_df(self):
        v1 = fit_vocabulary(["Alpha", "Beta"])
        v2 = fit_vocabulary(["Alpha", "Alpha", "Beta"])
        assert set(v1.index) == set(v2.index)
        assert v2.document_frequencies[" al"] == 2

    def test_idf_formula(self):
        vocab = fit_vocabulary(["Alpha", "Beta", "Alpha Beta"])
        assert vocab.idf(" al") == pytest.approx(math.log(4 / 3) + 1.0)
        assert vocab.idf("zzz") == pytest.approx(math.log(4 / 1) + 1.0)

    def test_empty_list_rejected(self):
        with pytest.raises(ValueError):
            fit_vocabulary([])


@pytest.fixture(scope="module")
def sim():
    return NameSimilarity(ANCHOR_CORPUS)


class TestCosine:
    def test_identical_names(self, sim):
        assert sim.similarity("Jan Jansen", "Jan Jansen") == 1.0

    def test_disjoint_names(self, sim):
        assert sim.similarity("Jan Jansen", "Delta Groep B.V.") == 0.0

    def test_empty_scores_zero(self, sim):
        assert sim.similarity("", "Jan Jansen") == 0.0
        assert cosine({}, {}) == 0.0

    def test_sempter_anchor(self, sim):
        s = sim.similarity("Sempter Fidelis B.V.", "Sempter Fidelis Beheer B.V.")
        assert s >= 0.85

    def test_ordering_anchor(self, sim):
        sempter = sim.similarity("Sempter Fidelis B.V.", "Sempter Fidelis Beheer B.V.")
        vistra = sim.similarity("Vistra Management Services B.V.",
                                "Vita Management Services B.V.")
        assert sempter > vistra

    @given(a=name_strategy, b=name_strategy)
    def test_symmetry_and_range(self, a, b):
        sim = NameSimilarity([a, b, "padding name"])
        s_ab = cosine(vectorize(a, sim.vocab), vectorize(b, sim.vocab))
        s_ba = cosine(vectorize(b, sim.vocab), vectorize(a, sim.vocab))
        assert s_ab == s_ba
        assert 0.0 <= s_ab <= 1.0

    @given(a=name_strategy)
    def test_self_similarity(self, a):
        sim = NameSimilarity([a, "padding name"])
        vec = vectorize(a, sim.vocab)
        if vec:
            assert cosine(vec, vec) == pytest.approx(1.0)


class TestMatchNames:
    def test_disjoint_sets_empty(self):
        assert match_names(["aaa bbb"], ["ccc ddd"], 0.5) == []

    def test_exact_duplicates_match_at_one(self):
        result = match_names(["Jan Jansen"], ["Jan Jansen", "Piet"], 0.99)
        assert result[0][:2] == ("Jan Jansen", "Jan Jansen")
        assert result[0][2] == pytest.approx(1.0)

    def test_equals_brute_force_scan(self):
        queries = ANCHOR_CORPUS[::2]
        targets = ANCHOR_CORPUS[1::2]
        threshold = 0.5
        result = match_names(queries, targets, threshold)

        sim = NameSimilarity(sorted(set(queries) | set(targets)))
        brute = []
        for q, t in itertools.product(queries, targets):
            qv, tv = vectorize(q, sim.vocab), vectorize(t, sim.vocab)
            s = cosine(qv, tv)
            if qv and s >= threshold:
                brute.append((q, t, s))
        brute.sort(key=lambda p: (-p[2], p[0], p[1]))
        assert result == brute
        assert len(result) > 0

    def test_threshold_anti_monotone(self):
        low = {(q, t) for q, t, _ in match_names(ANCHOR_CORPUS, ANCHOR_CORPUS, 0.4)}
        high = {(q, t) for q, t, _ in match_names(ANCHOR_CORPUS, ANCHOR_CORPUS, 0.8)}
        assert high <= low
        assert high < low

    def test_order_invariance(self):
        a = match_names(ANCHOR_CORPUS[:30], ANCHOR_CORPUS[30:60], 0.3)
        b = match_names(list(reversed(ANCHOR_CORPUS[:30])),
                        list(reversed(ANCHOR_CORPUS[30:60])), 0.3)
        assert a == b

    def test_invalid_threshold(self):
        with pytest.raises(ValueError):
            match_names(["a"], ["b"], 0.0)
