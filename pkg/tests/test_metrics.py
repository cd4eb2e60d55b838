"""Metric hand cases against mock scorers with injected probability tables."""

import math

import numpy as np
import pytest

from debiaslab.errors import DataError, NumericError
from debiaslab.metrics import (
    BiasSpec, DiscoResult, EncoderMlmScorer, LayerRange, becpro_score,
    disco_candidates, disco_scores, extract_word_embedding, kurita_association,
    nli_accuracy, nli_bias, sts_bias, sts_pearson, weat_test,
)
from debiaslab.model import Encoder, ModelConfig, encode_batch
from debiaslab.vocab import SPECIALS, Vocab, split_words


class MockScorer:
    """Scorer with a probability table keyed by (ids, masked positions)."""

    def __init__(self, words, default=1e-6):
        self.vocab = Vocab(list(SPECIALS) + list(words))
        self.default = default
        self.table = {}

    def put(self, text, positions, dist, blank=None):
        ids = self._ids(text, blank)
        self.table[(tuple(ids), tuple(positions))] = dist

    def _ids(self, text, blank=None):
        words = split_words(text)
        ids = [self.vocab.cls_id] + [self.vocab.id(w) for w in words] + [self.vocab.sep_id]
        if blank is not None:
            ids[blank] = self.vocab.mask_id
        return ids

    def mask_fill_probs(self, ids, positions):
        masked = list(ids)
        for p in positions:
            masked[p] = self.vocab.mask_id
        key = (tuple(masked), tuple(sorted(positions)))
        out = np.full((len(positions), len(self.vocab)), self.default)
        dist = self.table.get(key)
        if dist:
            for tok, prob in dist.items():
                out[:, self.vocab.id(tok)] = prob
        return out


def _kurita_scorer(p_only, p_both):
    sc = MockScorer(["he", "is", "a", "mechanic", "."])
    sent = "he is a mechanic ."
    ids = sc._ids(sent)
    masked_term = list(ids)
    masked_term[1] = sc.vocab.mask_id
    sc.table[(tuple(masked_term), (1,))] = {"he": p_only}
    masked_both = list(masked_term)
    masked_both[4] = sc.vocab.mask_id
    sc.table[(tuple(masked_both), (1, 4))] = {"he": p_both}
    return sc, sent


class TestKuritaAssociation:
    def test_log_ratio_hand_case(self):
        sc, sent = _kurita_scorer(0.4, 0.2)
        a = kurita_association(sc, sent, "he", "mechanic")
        assert abs(a - math.log(2)) < 1e-12

    def test_equal_probabilities_give_zero(self):
        sc, sent = _kurita_scorer(0.3, 0.3)
        assert abs(kurita_association(sc, sent, "he", "mechanic")) < 1e-12

    def test_antisymmetry(self):
        sc, sent = _kurita_scorer(0.2, 0.4)
        assert abs(kurita_association(sc, sent, "he", "mechanic") + math.log(2)) < 1e-12

    def test_term_must_occur_once(self):
        sc, _ = _kurita_scorer(0.4, 0.2)
        with pytest.raises(DataError, match="exactly once"):
            kurita_association(sc, "he is he .", "he", "is")


class TestBecPro:
    def _scorer(self, biases):
        # masking the person slot makes the male and female sentences
        # identical, so each masked input carries one distribution with
        # both terms: a_m = log(base*e^b / base) = b, a_f = 0
        words = ["he", "she", "is", "a"] + [f"job{i}" for i in range(len(biases))]
        sc = MockScorer(words)
        instances = []
        base = 0.1
        for i, b in enumerate(biases):
            male, female = f"he is a job{i}", f"she is a job{i}"
            ids = sc._ids(male)
            only, both = list(ids), list(ids)
            only[1] = sc.vocab.mask_id
            both[1] = both[4] = sc.vocab.mask_id
            sc.table[(tuple(only), (1,))] = {"he": base * math.exp(b), "she": base}
            sc.table[(tuple(both), (1, 4))] = {"he": base, "she": base}
            instances.append((male, female, f"job{i}"))
        return sc, instances

    def test_symmetric_model_is_unbiased(self):
        sc, instances = self._scorer([0.0, 0.0])
        res = becpro_score(sc, instances)
        assert res.avg_bias == pytest.approx(0.0, abs=1e-12)
        assert res.fraction_below[0.1] == 1.0
        assert res.fraction_below[0.7] == 1.0

    def test_blist_arithmetic(self):
        sc, instances = self._scorer([0.05, 0.5, 1.0])
        res = becpro_score(sc, instances)
        assert res.avg_bias == pytest.approx((0.05 + 0.5 + 1.0) / 3, abs=1e-9)
        assert res.fraction_below[0.1] == pytest.approx(1 / 3)
        assert res.fraction_below[0.7] == pytest.approx(2 / 3)

    def test_absolute_value_convention(self):
        sc, instances = self._scorer([-0.05])
        res = becpro_score(sc, instances)
        assert res.fraction_below[0.1] == 1.0

    def test_signed_mode(self):
        sc, instances = self._scorer([-0.05])
        res = becpro_score(sc, instances, signed=True)
        assert res.fraction_below[0.1] == 1.0  # -0.05 < 0.1 under signed reading
        sc, instances = self._scorer([0.5])
        res = becpro_score(sc, instances, signed=True)
        assert res.fraction_below[0.1] == 0.0

    def test_oov_instances_skipped_and_counted(self):
        sc, instances = self._scorer([0.3])
        instances.append(("he is a zorp", "she is a zorp", "zorp"))  # OOV profession
        res = becpro_score(sc, instances)
        assert res.n_evaluated == 1 and res.n_skipped == 1

    def test_all_skipped_is_error(self):
        sc, _ = self._scorer([0.3])
        with pytest.raises(DataError, match="skipped"):
            becpro_score(sc, [("he is a zorp", "she is a zorp", "zorp")])

    def test_empty_dataset_is_error(self):
        sc, _ = self._scorer([0.3])
        with pytest.raises(DataError, match="empty"):
            becpro_score(sc, [])


class DiscoMock:
    def __init__(self, words):
        self.vocab = Vocab(list(SPECIALS) + list(words))
        self.table = {}

    def put(self, filled, dist):
        left, right = filled.split("[BLANK]")
        ids = ([self.vocab.cls_id] + [self.vocab.id(w) for w in split_words(left)]
               + [self.vocab.mask_id] + [self.vocab.id(w) for w in split_words(right)]
               + [self.vocab.sep_id])
        self.table[tuple(ids)] = dist

    def mask_fill_probs(self, ids, positions):
        out = np.zeros((len(positions), len(self.vocab)))
        for tok, prob in self.table.get(tuple(ids), {}).items():
            out[:, self.vocab.id(tok)] = prob
        return out


class TestDisco:
    def test_identical_distributions(self):
        sc = DiscoMock(["john", "mary", "likes", "art", "math"])
        dist = {"art": 0.4, "math": 0.3}
        sc.put("john likes [BLANK]", dist)
        sc.put("mary likes [BLANK]", dist)
        res = disco_scores(sc, [("john likes [BLANK]", "mary likes [BLANK]")])
        assert res.avg_frac == 1.0
        assert res.avg_diff == pytest.approx(0.0, abs=1e-12)

    def test_partial_overlap_fraction(self):
        sc = DiscoMock(["john", "mary", "likes", "a", "b", "c", "d"])
        sc.put("john likes [BLANK]", {"a": 0.2, "b": 0.2, "c": 0.2})
        sc.put("mary likes [BLANK]", {"b": 0.2, "c": 0.2, "d": 0.2})
        res = disco_scores(sc, [("john likes [BLANK]", "mary likes [BLANK]")])
        assert res.avg_frac == pytest.approx(2 / 3)

    def test_disjoint_hand_case(self):
        sc = DiscoMock(["john", "mary", "likes", "a", "b"])
        sc.put("john likes [BLANK]", {"a": 0.6})
        sc.put("mary likes [BLANK]", {"b": 0.6})
        res = disco_scores(sc, [("john likes [BLANK]", "mary likes [BLANK]")])
        assert res.avg_frac == 0.0
        assert res.avg_diff == pytest.approx(2.0, abs=1e-12)

    def test_literal_denominator_mode(self):
        sc = DiscoMock(["john", "mary", "likes", "a", "b"])
        sc.put("john likes [BLANK]", {"a": 0.6})
        sc.put("mary likes [BLANK]", {"b": 0.6, "a": 0.05})
        # candidates: C_m = {a}, C_f = {b} (a is below threshold for f);
        # num over union = |0.6-0.05| + |0-0.6| = 1.15
        # corrected: den = (sum_{C_m} p_m + sum_{C_f} p_f)/2 = 0.6
        res_c = disco_scores(sc, [("john likes [BLANK]", "mary likes [BLANK]")])
        assert res_c.avg_diff == pytest.approx(1.15 / 0.6)
        # literal: second sum is p_f over C_m = {a}: 0.05; den = (0.6 + 0.05)/2
        res_l = disco_scores(sc, [("john likes [BLANK]", "mary likes [BLANK]")],
                             denominator="literal")
        assert res_l.avg_diff == pytest.approx(1.15 / 0.325)

    def test_empty_candidate_set_skipped_for_frac(self):
        sc = DiscoMock(["john", "mary", "likes", "a"])
        sc.put("john likes [BLANK]", {"a": 0.6})
        sc.put("mary likes [BLANK]", {"a": 0.05})  # below threshold: empty
        res = disco_scores(sc, [("john likes [BLANK]", "mary likes [BLANK]")])
        assert res.n_skipped == 1 and res.n_frac == 0
        assert res.n_diff == 1  # union nonempty, diff still computable

    def test_all_skipped_is_error(self):
        sc = DiscoMock(["john", "mary", "likes"])
        sc.put("john likes [BLANK]", {})
        sc.put("mary likes [BLANK]", {})
        with pytest.raises(DataError, match="skipped"):
            disco_scores(sc, [("john likes [BLANK]", "mary likes [BLANK]")])

    def test_candidates_threshold_strictness(self):
        sc = DiscoMock(["john", "likes", "a", "b"])
        sc.put("john likes [BLANK]", {"a": 0.5, "b": 0.1})
        cands = disco_candidates(sc, "john likes [BLANK]", threshold=0.1)
        assert set(cands) == {"a"}  # strictly greater than

    def test_uniform_large_vocab_is_empty(self):
        words = [f"w{i}" for i in range(995)]
        sc = DiscoMock(words)
        sc.put("w0 [BLANK]", {w: 1 / 1000 for w in words})
        assert disco_candidates(sc, "w0 [BLANK]") == {}

    def test_threshold_zero_includes_all_positive(self):
        sc = DiscoMock(["john", "likes", "a", "b"])
        sc.put("john likes [BLANK]", {"a": 0.5, "b": 0.001})
        cands = disco_candidates(sc, "john likes [BLANK]", threshold=0.0)
        assert set(cands) == {"a", "b"}

    def test_template_must_have_one_blank(self):
        sc = DiscoMock(["john", "likes"])
        with pytest.raises(DataError, match="BLANK"):
            disco_candidates(sc, "john likes nothing")


class TestStsBias:
    def test_gender_blind_scorer(self):
        score = lambda s1, s2: float(len(s1) + len(s2)) * 0  # constant 0
        data = [(("a man walks", "a nurse walks"), ("a woman walks", "a nurse walks"))]
        assert sts_bias(score, data) == 0.0

    def test_gap_arithmetic(self):
        table = {("m1", "p"): 0.9, ("f1", "p"): 0.7, ("m2", "p"): 0.1, ("f2", "p"): 0.5}
        score = lambda s1, s2: table[(s1, s2)]
        data = [(("m1", "p"), ("f1", "p")), (("m2", "p"), ("f2", "p"))]
        assert sts_bias(score, data) == pytest.approx(0.3)

    def test_perfect_predictions_give_pearson_one(self):
        labeled = [("a", "b", 0.1), ("c", "d", 0.5), ("e", "f", 0.9)]
        table = {("a", "b"): 0.1, ("c", "d"): 0.5, ("e", "f"): 0.9}
        score = lambda s1, s2: table[(s1, s2)]
        assert sts_pearson(score, labeled) == pytest.approx(1.0)

    def test_constant_predictions_reported_as_none(self):
        labeled = [("a", "b", 0.1), ("c", "d", 0.5)]
        assert sts_pearson(lambda s1, s2: 0.42, labeled) is None


class TestNliBias:
    def test_always_neutral(self):
        prob = lambda p, h: np.array([0.0, 1.0, 0.0])
        fn, nn = nli_bias(prob, [("p1", "h1"), ("p2", "h2")])
        assert fn == 1.0 and nn == 1.0

    def test_mixed_hand_case(self):
        dists = iter([np.array([0.3, 0.6, 0.1]), np.array([0.5, 0.2, 0.3])])
        prob = lambda p, h: next(dists)
        fn, nn = nli_bias(prob, [("p1", "h1"), ("p2", "h2")])
        assert fn == pytest.approx(0.5)
        assert nn == pytest.approx(0.4)

    def test_uniform_ties_break_to_lowest_index(self):
        prob = lambda p, h: np.array([1 / 3, 1 / 3, 1 / 3])
        fn, nn = nli_bias(prob, [("p", "h")])
        assert fn == 0.0  # argmax tie resolves to entailment, not neutral
        assert nn == pytest.approx(1 / 3)

    def test_accuracy(self):
        prob = lambda p, h: np.array([0.1, 0.8, 0.1])
        labeled = [("p", "h", 1), ("p2", "h2", 0)]
        assert nli_accuracy(prob, labeled) == 0.5

    def test_empty_dataset_is_error(self):
        with pytest.raises(DataError):
            nli_bias(lambda p, h: np.ones(3) / 3, [])


class TestEmbeddingExtraction:
    @pytest.fixture
    def model(self):
        vocab = Vocab(list(SPECIALS) + ["alpha", "beta", "gamma"])
        return Encoder(ModelConfig(layers=2, hidden=8, heads=2, ff_inner=12,
                                   max_seq_len=8), vocab, seed=0)

    def test_single_level_range(self, model):
        emb = extract_word_embedding(model, "alpha", LayerRange(1, 1))
        batch = encode_batch(["alpha"], model.vocab, 8)
        levels, _ = model.forward(batch)
        np.testing.assert_allclose(emb, levels[1][0, 1], atol=1e-15)

    def test_range_is_mean_of_levels(self, model):
        e0 = extract_word_embedding(model, "beta", LayerRange(0, 0))
        e1 = extract_word_embedding(model, "beta", LayerRange(1, 1))
        e01 = extract_word_embedding(model, "beta", LayerRange(0, 1))
        np.testing.assert_allclose(e01, (e0 + e1) / 2, atol=1e-14)

    def test_grid_cell_count(self, model):
        levels = model.config.layers
        cells = [(m, n) for m in range(levels + 1) for n in range(m, levels + 1)]
        assert len(cells) == (levels + 1) * (levels + 2) // 2 == 6

    def test_oov_word_warns_and_proceeds(self, model, caplog):
        import logging

        with caplog.at_level(logging.WARNING):
            emb = extract_word_embedding(model, "zorp", LayerRange(0, 2))
        assert emb.shape == (8,)
        assert any("out of vocabulary" in r.message for r in caplog.records)

    def test_range_beyond_depth_rejected(self, model):
        with pytest.raises(DataError, match="depth"):
            extract_word_embedding(model, "alpha", LayerRange(0, 3))

    def test_invalid_range_rejected(self):
        with pytest.raises(DataError):
            LayerRange(2, 1)


class TestBiasSpec:
    def test_shipped_gender_test_loads(self):
        from debiaslab.generators import data_path

        spec = BiasSpec.from_file(str(data_path("weat7.json")))
        assert len(spec.targets1) == len(spec.targets2) == 8
        assert len(spec.attributes1) == len(spec.attributes2) == 8
        assert "math" in spec.targets1 and "poetry" in spec.targets2

    def test_duplicates_rejected(self):
        with pytest.raises(DataError, match="duplicate"):
            BiasSpec("x", ["a", "a"], ["b"], ["c"], ["d"])

    def test_empty_set_rejected(self):
        with pytest.raises(DataError, match="empty"):
            BiasSpec("x", [], ["b"], ["c"], ["d"])

    def test_weat_test_runs_on_model(self):
        vocab = Vocab(list(SPECIALS) + ["a1", "a2", "b1", "b2", "x1", "y1"])
        model = Encoder(ModelConfig(layers=1, hidden=8, heads=2, ff_inner=8,
                                    max_seq_len=8), vocab, seed=3)
        spec = BiasSpec("toy", ["a1", "a2"], ["b1", "b2"], ["x1"], ["y1"])
        res = weat_test(model, spec, LayerRange(0, 1), mode="exact")
        assert res.exact and res.permutations == 6
        assert 0.0 <= res.p_value <= 1.0
        assert res.unknown_terms == 0
