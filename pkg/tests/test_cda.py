import numpy as np
import pytest

from debiaslab.cda import (
    ORIGIN_COUNTERFACTUAL, ORIGIN_ORIGINAL, TermPairLexicon, augment_two_sided,
    counterfactual, load_augmented, load_corpus, load_lexicon, save_augmented,
)
from debiaslab.errors import DataError
from debiaslab.generators import data_path
from debiaslab.numerics import make_rng

SHIPPED = str(data_path("gender_pairs.tsv"))


@pytest.fixture(scope="module")
def lexicon():
    return load_lexicon(SHIPPED)


class TestLoadLexicon:
    def test_single_pair(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("man\twoman\n")
        lex = load_lexicon(path)
        assert len(lex) == 1 and lex.pairs[0] == ("man", "woman")

    def test_shipped_file_has_193_pairs(self, lexicon):
        assert len(lexicon) == 193

    def test_space_instead_of_tab_reports_line(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("man\twoman\nman woman\n")
        with pytest.raises(DataError, match=":2"):
            load_lexicon(path)

    def test_comments_and_blank_lines_allowed(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("# comment\n\nman\twoman\n")
        assert len(load_lexicon(path)) == 1

    def test_duplicate_pair_rejected(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("man\twoman\nman\twoman\n")
        with pytest.raises(DataError, match="duplicate"):
            load_lexicon(path)

    def test_identical_terms_rejected(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("man\tman\n")
        with pytest.raises(DataError, match="identical"):
            load_lexicon(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("# nothing\n")
        with pytest.raises(DataError, match="no term pairs"):
            load_lexicon(path)

    def test_uppercase_rejected(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("Man\twoman\n")
        with pytest.raises(DataError, match="lowercase"):
            load_lexicon(path)


class TestCounterfactual:
    def test_single_swap(self, lexicon):
        assert counterfactual("the man is a doctor", lexicon) == ("the woman is a doctor", True)

    def test_simultaneous_multi_swap_with_case(self, lexicon):
        out, replaced = counterfactual("He told his brother", lexicon)
        assert (out, replaced) == ("She told her sister", True)

    def test_no_match_passthrough(self, lexicon):
        text = "the doctor arrived"
        out, replaced = counterfactual(text, lexicon)
        assert out == text and replaced is False

    def test_no_match_is_byte_identical(self, lexicon):
        text = "Quoth the étoile: nothing gendered here\t(honest)."
        out, replaced = counterfactual(text, lexicon)
        assert out == text and not replaced

    def test_whole_word_only(self, lexicon):
        out, replaced = counterfactual("the mangrove swamp", lexicon)
        assert out == "the mangrove swamp" and not replaced

    def test_all_caps_gets_title_case(self, lexicon):
        out, _ = counterfactual("HE left", lexicon)
        assert out == "She left"

    def test_many_to_one_uses_first_pair(self, lexicon):
        # "her" occurs as partner of both "him" and "his"; (him, her)
        # precedes (his, her) in the shipped file
        out, _ = counterfactual("I saw her", lexicon)
        assert out == "I saw him"

    def test_bidirectional(self, lexicon):
        out, _ = counterfactual("the woman is a doctor", lexicon)
        assert out == "the man is a doctor"

    def test_involution_on_bijective_subset(self, lexicon):
        bij = lexicon.bijective_subset()
        terms = [t for pair in bij.pairs for t in pair]
        fillers = ["the", "a", "sees", "likes", "today", ",", "."]
        rng = make_rng(11)
        for _ in range(500):
            n = rng.integers(1, 10)
            words = []
            for _ in range(n):
                pool = terms if rng.random() < 0.5 else fillers
                words.append(pool[rng.integers(len(pool))])
            sentence = " ".join(words)
            once, _ = counterfactual(sentence, bij)
            twice, _ = counterfactual(once, bij)
            assert twice == sentence

    def test_word_conservation(self, lexicon):
        # same number of whitespace-delimited words (shipped pairs are
        # single words, some with internal punctuation like ma'am)
        rng = make_rng(12)
        pool = [t for pair in lexicon.pairs for t in pair]
        pool += ["the", "sees", "doctor", "today"]
        for _ in range(300):
            words = [pool[rng.integers(len(pool))] for _ in range(rng.integers(1, 9))]
            sentence = " ".join(words)
            out, _ = counterfactual(sentence, lexicon)
            assert len(out.split()) == len(sentence.split())


class TestAugmentTwoSided:
    def test_single_gendered_sentence(self, lexicon):
        recs = augment_two_sided(["the man runs"], lexicon)
        assert [r.text for r in recs] == ["the man runs", "the woman runs"]
        assert [r.origin for r in recs] == [ORIGIN_ORIGINAL, ORIGIN_COUNTERFACTUAL]
        assert recs[1].source_index == 0

    def test_no_gendered_terms_passthrough(self, lexicon):
        corpus = ["the sky is blue", "rain falls"]
        recs = augment_two_sided(corpus, lexicon)
        assert [r.text for r in recs] == corpus

    def test_counts_and_ordering(self, lexicon):
        corpus = ["the man runs", "the sky is blue", "she reads"]
        recs = augment_two_sided(corpus, lexicon)
        assert len(recs) == 5
        origins = [r.origin for r in recs]
        assert origins == [ORIGIN_ORIGINAL] * 3 + [ORIGIN_COUNTERFACTUAL] * 2
        # originals keep corpus order; counterfactuals keep source order
        assert [r.text for r in recs[:3]] == corpus
        assert [r.source_index for r in recs[3:]] == [0, 2]

    def test_roundtrip_annotated_file(self, lexicon, tmp_path):
        recs = augment_two_sided(["the man runs", "it rains"], lexicon)
        path = tmp_path / "aug.tsv"
        save_augmented(recs, path, annotate=True)
        loaded = load_augmented(path)
        assert loaded == recs

    def test_plain_save_and_corpus_load(self, lexicon, tmp_path):
        recs = augment_two_sided(["the man runs"], lexicon)
        path = tmp_path / "aug.txt"
        save_augmented(recs, path, annotate=False)
        assert load_corpus(path) == ["the man runs", "the woman runs"]


class TestLexiconStructure:
    def test_partner_lookup(self, lexicon):
        assert lexicon.partner("man") == "woman"
        assert lexicon.partner("woman") == "man"
        assert lexicon.partner("nonword") is None

    def test_bijective_subset_excludes_shared_terms(self, lexicon):
        bij = lexicon.bijective_subset()
        terms = [t for pair in bij.pairs for t in pair]
        assert len(terms) == len(set(terms))
        assert ("him", "her") not in bij.pairs  # "her" also partners "his"
