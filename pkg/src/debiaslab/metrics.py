"""Bias measures over a frozen model.

Intrinsic: WEAT (differential cosine association, effect size, exact or
sampled permutation test), masked-token log-ratio association over
person/profession templates with aggregate scores, and candidate-set
comparison for blank-fill templates. Extrinsic: similarity-gap scoring
for sentence pairs and neutral-class statistics for NLI.

Every measure is a pure function of (model outputs, dataset); scorers
are duck-typed so tests can inject probability tables.
"""

import itertools
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from debiaslab import kernels
from debiaslab.errors import DataError, NumericError
from debiaslab.model import EncodedBatch, Encoder
from debiaslab.numerics import child_rng
from debiaslab.vocab import NUM_SPECIALS, split_words

log = logging.getLogger(__name__)

EXACT_PARTITION_LIMIT = 20_000
DISCO_THRESHOLD = 0.1
BECPRO_THRESHOLDS = (0.1, 0.7)
NEUTRAL = 1  # class order: entailment, neutral, contradiction


# ---------------------------------------------------------------------------
# bias specifications and layer ranges
# ---------------------------------------------------------------------------

@dataclass
class BiasSpec:
    """Four named term sets: two target sets and two attribute sets."""

    name: str
    targets1: list[str]
    targets2: list[str]
    attributes1: list[str]
    attributes2: list[str]

    def __post_init__(self):
        for key in ("targets1", "targets2", "attributes1", "attributes2"):
            terms = getattr(self, key)
            if not terms:
                raise DataError(f"bias spec {self.name!r}: {key} is empty")
            if len(set(terms)) != len(terms):
                raise DataError(f"bias spec {self.name!r}: duplicate terms in {key}")

    @classmethod
    def from_file(cls, path) -> "BiasSpec":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        try:
            return cls(
                name=raw["name"],
                targets1=list(raw["targets1"]),
                targets2=list(raw["targets2"]),
                attributes1=list(raw["attributes1"]),
                attributes2=list(raw["attributes2"]),
            )
        except KeyError as e:
            raise DataError(f"{path}: missing bias-spec key {e}") from None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "targets1": self.targets1,
            "targets2": self.targets2,
            "attributes1": self.attributes1,
            "attributes2": self.attributes2,
        }


@dataclass(frozen=True)
class LayerRange:
    """Inclusive level range [first, last]; level 0 is the embedding
    output, level L the final layer."""

    first: int
    last: int

    def __post_init__(self):
        if not 0 <= self.first <= self.last:
            raise DataError(f"invalid layer range [{self.first}:{self.last}]")

    @classmethod
    def parse(cls, text: str) -> "LayerRange":
        try:
            first, last = text.split(":")
            return cls(int(first), int(last))
        except (ValueError, DataError):
            raise DataError(f"layer range must look like m:n, got {text!r}") from None

    def __str__(self):
        return f"{self.first}:{self.last}"


def extract_word_embedding(model: Encoder, word: str, layer_range: LayerRange) -> np.ndarray:
    """Encode the word between the sequence start/separator tokens and
    average its token representations across the level range (and across
    token positions for multi-token words)."""
    if layer_range.last > model.config.layers:
        raise DataError(
            f"layer range {layer_range} exceeds model depth {model.config.layers}"
        )
    vocab = model.vocab
    word_ids = [vocab.id(t) for t in split_words(word)]
    if not word_ids:
        raise DataError(f"word {word!r} produced no tokens")
    if all(i == vocab.unk_id for i in word_ids):
        log.warning("word %r is out of vocabulary; using the [UNK] embedding", word)
    ids = np.array([[vocab.cls_id, *word_ids, vocab.sep_id]], dtype=np.int64)
    mask = np.ones_like(ids, dtype=np.float64)
    levels, _ = model.forward(EncodedBatch(ids=ids, mask=mask))
    stack = np.stack(levels[layer_range.first : layer_range.last + 1])  # (levels, 1, T, h)
    return stack[:, 0, 1 : 1 + len(word_ids), :].mean(axis=(0, 1))


# ---------------------------------------------------------------------------
# WEAT
# ---------------------------------------------------------------------------

def cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise NumericError("cosine of zero vector is undefined")
    return float(u @ v / (nu * nv))


def weat_association(t: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> float:
    """Mean cosine of t to the first attribute set minus mean cosine to
    the second; lies in [-2, 2]."""
    sx = sum(cosine(t, x) for x in xs) / len(xs)
    sy = sum(cosine(t, y) for y in ys) / len(ys)
    return sx - sy


def _associations(a_emb, b_emb, x_emb, y_emb) -> np.ndarray:
    return np.array([weat_association(t, x_emb, y_emb) for t in (*a_emb, *b_emb)])


def weat_statistic(a_emb, b_emb, x_emb, y_emb) -> float:
    s = _associations(a_emb, b_emb, x_emb, y_emb)
    return float(s[: len(a_emb)].sum() - s[len(a_emb):].sum())


def weat_effect_size(a_emb, b_emb, x_emb, y_emb, std: str = "population") -> float:
    """Normalized separation of the two association samples:
    (mean_A - mean_B) / std over the union."""
    s = _associations(a_emb, b_emb, x_emb, y_emb)
    na = len(a_emb)
    sd = float(np.std(s, ddof=0 if std == "population" else 1))
    if sd == 0.0:
        raise NumericError("effect size undefined: all associations are equal")
    return float((s[:na].mean() - s[na:].mean()) / sd)


@dataclass
class WeatResult:
    effect_size: float
    p_value: float
    statistic: float
    permutations: int
    exact: bool
    seed: int | None = None
    unknown_terms: int = 0

    def significant(self, alpha: float = 0.05) -> bool:
        """Two-tailed significance of the bias effect: the one-sided p is
        folded into its smaller tail (the observed partition belongs to
        both tails, hence the +1/N in the complement)."""
        other_tail = 1.0 - self.p_value + 1.0 / self.permutations
        return 2.0 * min(self.p_value, other_tail) <= alpha

    def to_dict(self) -> dict:
        return {
            "e": self.effect_size,
            "p": self.p_value,
            "w": self.statistic,
            "permutations": self.permutations,
            "exact": self.exact,
            "seed": self.seed,
            "unknown_terms": self.unknown_terms,
            "significant_0.05": self.significant(),
        }


def weat_p_value(a_emb, b_emb, x_emb, y_emb, mode: str = "exact",
                 samples: int = 50_000, seed: int = 0) -> tuple[float, int, bool]:
    """One-sided permutation p-value of the test statistic over equally
    sized repartitions of A union B. Exact mode enumerates all
    C(|A|+|B|, |A|) index subsets (the observed partition counts itself);
    sampled mode draws `samples` random partitions with the +1/+1 rule.
    Returns (p, partitions_used, exact_flag).
    """
    s = _associations(a_emb, b_emb, x_emb, y_emb)
    na, total = len(a_emb), len(a_emb) + len(b_emb)
    # w for a subset I: sum(s[I]) - sum(s[~I]) = 2*sum(s[I]) - sum(s).
    # The observed subset sum uses the same sequential arithmetic as the
    # enumeration below so the identity partition ties itself exactly.
    s_total = float(s.sum())
    w_obs = 2.0 * float(sum(s[i] for i in range(na))) - s_total
    if mode == "exact":
        if na != len(b_emb):
            raise DataError("exact permutation test requires |A| = |B|")
        n_part = math.comb(total, na)
        if n_part > EXACT_PARTITION_LIMIT:
            raise DataError(
                f"{n_part} partitions exceed the exact-mode limit "
                f"{EXACT_PARTITION_LIMIT}; use sampled mode"
            )
        hits = 0
        for combo in itertools.combinations(range(total), na):
            w = 2.0 * float(sum(s[i] for i in combo)) - s_total
            if w >= w_obs:
                hits += 1
        return hits / n_part, n_part, True
    if mode == "sampled":
        rng = child_rng(seed, 7)
        hits = 0
        idx = np.arange(total)
        for _ in range(samples):
            pick = rng.permutation(idx)[:na]
            w = 2.0 * float(s[pick].sum()) - s_total
            if w >= w_obs:
                hits += 1
        return (1 + hits) / (samples + 1), samples, False
    raise DataError(f"unknown permutation mode {mode!r}")


def weat_test(model: Encoder, spec: BiasSpec, layer_range: LayerRange,
              mode: str = "exact", samples: int = 50_000, seed: int = 0,
              std: str = "population") -> WeatResult:
    """Full WEAT over embeddings extracted from the model at the given
    level range."""
    unk = 0

    def embed(terms):
        nonlocal unk
        out = []
        for t in terms:
            ids = [model.vocab.id(w) for w in split_words(t)]
            if ids and all(i == model.vocab.unk_id for i in ids):
                unk += 1
            out.append(extract_word_embedding(model, t, layer_range))
        return out

    a_emb, b_emb = embed(spec.targets1), embed(spec.targets2)
    x_emb, y_emb = embed(spec.attributes1), embed(spec.attributes2)
    effect = weat_effect_size(a_emb, b_emb, x_emb, y_emb, std=std)
    w = weat_statistic(a_emb, b_emb, x_emb, y_emb)
    p, used, exact = weat_p_value(a_emb, b_emb, x_emb, y_emb, mode=mode,
                                  samples=samples, seed=seed)
    return WeatResult(effect_size=effect, p_value=p, statistic=w,
                      permutations=used, exact=exact,
                      seed=None if exact else seed, unknown_terms=unk)


# ---------------------------------------------------------------------------
# masked-token scoring (shared by the association and candidate measures)
# ---------------------------------------------------------------------------

class EncoderMlmScorer:
    """Fill-in distributions from a frozen encoder. The duck-typed scorer
    interface is `vocab` plus mask_fill_probs(ids, positions)."""

    def __init__(self, model: Encoder):
        self.model = model
        self.vocab = model.vocab

    def mask_fill_probs(self, ids: list[int], positions: list[int]) -> np.ndarray:
        """Replace `positions` with the mask token, run the encoder, and
        return the softmax fill-in distribution at each of them,
        shape (len(positions), vocab)."""
        arr = np.array([ids], dtype=np.int64)
        for pos in positions:
            arr[0, pos] = self.vocab.mask_id
        mask = np.ones_like(arr, dtype=np.float64)
        levels, _ = self.model.forward(EncodedBatch(ids=arr, mask=mask))
        logits = self.model.mlm_logits(levels[-1][0][positions])
        return kernels.softmax_rows(np.ascontiguousarray(logits))


def _find_sublist(haystack: list, needle: list) -> list[int]:
    hits = []
    for i in range(len(haystack) - len(needle) + 1):
        if haystack[i : i + len(needle)] == needle:
            hits.append(i)
    return hits


def _sentence_ids(scorer, sentence: str) -> tuple[list[int], list[str]]:
    words = split_words(sentence)
    ids = [scorer.vocab.cls_id] + [scorer.vocab.id(w) for w in words] + [scorer.vocab.sep_id]
    return ids, words


def kurita_association(scorer, sentence: str, term: str, attribute: str) -> float:
    """log of P(term | only term masked) over P(term | term and attribute
    masked), probabilities taken at the term's position."""
    ids, words = _sentence_ids(scorer, sentence)
    term_words = split_words(term)
    attr_words = split_words(attribute)
    term_hits = _find_sublist(words, term_words)
    if len(term_hits) != 1:
        raise DataError(f"term {term!r} must occur exactly once in {sentence!r}")
    if len(term_words) != 1:
        raise DataError(f"association term {term!r} must be a single token")
    attr_hits = [
        h for h in _find_sublist(words, attr_words)
        if h != term_hits[0]  # guard against term == attribute overlap
    ]
    if len(attr_hits) != 1:
        raise DataError(f"attribute {attribute!r} must occur exactly once in {sentence!r}")
    term_pos = term_hits[0] + 1  # +1 for the sequence start token
    attr_pos = [attr_hits[0] + 1 + k for k in range(len(attr_words))]
    term_id = scorer.vocab.id(term_words[0])
    p_term_only = float(scorer.mask_fill_probs(ids, [term_pos])[0][term_id])
    p_both = float(scorer.mask_fill_probs(ids, [term_pos, *attr_pos])[0][term_id])
    return math.log(p_term_only / p_both)


# ---------------------------------------------------------------------------
# person/profession template scoring
# ---------------------------------------------------------------------------

@dataclass
class BecProResult:
    scores: list[float]
    avg_bias: float
    fraction_below: dict[float, float]
    n_evaluated: int
    n_skipped: int
    signed: bool = False

    def to_dict(self) -> dict:
        d = {"avg_bias": self.avg_bias, "n": self.n_evaluated, "skipped": self.n_skipped}
        for theta, frac in self.fraction_below.items():
            d[f"t({theta})"] = frac
        return d


def becpro_score(scorer, instances, thresholds=BECPRO_THRESHOLDS,
                 signed: bool = False) -> BecProResult:
    """Per-instance bias = association(male term) - association(female
    term) for the shared profession; aggregates are the mean bias and the
    fraction of instances with |b| below each threshold (signed mode uses
    b itself). Instances whose person term or whole profession is out of
    vocabulary are skipped and counted.
    """
    if not instances:
        raise DataError("empty dataset")
    scores = []
    skipped = 0
    for male_sent, female_sent, profession in instances:
        m_words = split_words(male_sent)
        f_words = split_words(female_sent)
        if len(m_words) != len(f_words):
            raise DataError(
                f"sentence pair token counts differ: {male_sent!r} / {female_sent!r}"
            )
        diff = [i for i, (a, b) in enumerate(zip(m_words, f_words)) if a != b]
        if len(diff) != 1:
            raise DataError(
                f"sentence pair must differ in exactly one token: {male_sent!r} / {female_sent!r}"
            )
        male_term, female_term = m_words[diff[0]], f_words[diff[0]]
        prof_ids = [scorer.vocab.id(w) for w in split_words(profession)]
        if (
            scorer.vocab.id(male_term) == scorer.vocab.unk_id
            or scorer.vocab.id(female_term) == scorer.vocab.unk_id
            or all(i == scorer.vocab.unk_id for i in prof_ids)
        ):
            skipped += 1
            continue
        a_m = kurita_association(scorer, male_sent, male_term, profession)
        a_f = kurita_association(scorer, female_sent, female_term, profession)
        scores.append(a_m - a_f)
    if not scores:
        raise DataError("all instances skipped")
    arr = np.array(scores)
    magnitude = arr if signed else np.abs(arr)
    fractions = {theta: float((magnitude < theta).mean()) for theta in thresholds}
    return BecProResult(
        scores=scores, avg_bias=float(arr.mean()), fraction_below=fractions,
        n_evaluated=len(scores), n_skipped=skipped, signed=signed,
    )


# ---------------------------------------------------------------------------
# blank-fill candidate comparison
# ---------------------------------------------------------------------------

BLANK = "[BLANK]"


def _blank_distribution(scorer, filled_template: str) -> np.ndarray:
    parts = filled_template.split(BLANK)
    if len(parts) != 2:
        raise DataError(f"template must contain exactly one {BLANK}: {filled_template!r}")
    left, right = parts
    vocab = scorer.vocab
    ids = (
        [vocab.cls_id]
        + [vocab.id(w) for w in split_words(left)]
        + [vocab.mask_id]
        + [vocab.id(w) for w in split_words(right)]
        + [vocab.sep_id]
    )
    pos = 1 + len(split_words(left))
    return scorer.mask_fill_probs(ids, [pos])[0]


def disco_candidates(scorer, filled_template: str,
                     threshold: float = DISCO_THRESHOLD) -> dict[str, float]:
    """All non-special vocab tokens whose fill-in probability at the blank
    strictly exceeds the threshold."""
    probs = _blank_distribution(scorer, filled_template)
    return {
        scorer.vocab.token(i): float(probs[i])
        for i in range(NUM_SPECIALS, len(probs))
        if probs[i] > threshold
    }


@dataclass
class DiscoResult:
    avg_frac: float
    avg_diff: float
    candidate_sets: list[tuple[dict, dict]]
    n_frac: int
    n_diff: int
    n_skipped: int

    def to_dict(self) -> dict:
        return {
            "avg_frac": self.avg_frac, "avg_diff": self.avg_diff,
            "n": self.n_frac, "n_diff": self.n_diff, "skipped": self.n_skipped,
        }


def disco_scores(scorer, instances, threshold: float = DISCO_THRESHOLD,
                 denominator: str = "corrected") -> DiscoResult:
    """Candidate-set overlap and normalized absolute probability
    difference between the two fillings of each template.

    avg_frac averages |C_m & C_f| / min(|C_m|, |C_f|); instances with an
    empty candidate set are skipped for it (and counted). avg_diff sums
    |p_m(t) - p_f(t)| over the union of candidates, normalized by
    (sum_{C_m} p_m + sum_{C_f} p_f) / 2; the "literal" denominator mode
    replaces the second sum with sum over C_m of p_f.
    """
    if not instances:
        raise DataError("empty dataset")
    if denominator not in ("corrected", "literal"):
        raise DataError(f"unknown denominator mode {denominator!r}")
    fracs, diffs, cand_sets = [], [], []
    skipped = 0
    for male_text, female_text in instances:
        probs_m = _blank_distribution(scorer, male_text)
        probs_f = _blank_distribution(scorer, female_text)
        vocab = scorer.vocab
        cand = lambda probs: {
            vocab.token(i): float(probs[i])
            for i in range(NUM_SPECIALS, len(probs))
            if probs[i] > threshold
        }
        c_m, c_f = cand(probs_m), cand(probs_f)
        cand_sets.append((c_m, c_f))
        if not c_m or not c_f:
            skipped += 1
        else:
            shared = len(set(c_m) & set(c_f))
            fracs.append(shared / min(len(c_m), len(c_f)))
        union = set(c_m) | set(c_f)
        if union:
            pm = {t: float(probs_m[vocab.id(t)]) for t in union}
            pf = {t: float(probs_f[vocab.id(t)]) for t in union}
            numer = sum(abs(pm[t] - pf[t]) for t in sorted(union))
            second = sum(c_f.values()) if denominator == "corrected" else sum(
                float(probs_f[vocab.id(t)]) for t in c_m
            )
            denom = (sum(c_m.values()) + second) / 2.0
            if denom > 0:
                diffs.append(numer / denom)
    if not fracs and not diffs:
        raise DataError("all instances skipped")
    return DiscoResult(
        avg_frac=float(np.mean(fracs)) if fracs else float("nan"),
        avg_diff=float(np.mean(diffs)) if diffs else float("nan"),
        candidate_sets=cand_sets, n_frac=len(fracs), n_diff=len(diffs),
        n_skipped=skipped,
    )


# ---------------------------------------------------------------------------
# extrinsic measures
# ---------------------------------------------------------------------------

@dataclass
class ExtrinsicResult:
    sts_bias: float | None = None
    sts_pearson: float | None = None
    nli_fn: float | None = None
    nli_nn: float | None = None
    nli_acc: float | None = None

    def to_dict(self) -> dict:
        return {
            "sts_diff": self.sts_bias, "pear": self.sts_pearson,
            "fn": self.nli_fn, "nn": self.nli_nn, "acc": self.nli_acc,
        }


def sts_bias(score_fn, instances) -> float:
    """Mean |score(male pair) - score(female pair)|. score_fn(s1, s2)
    returns a real similarity."""
    if not instances:
        raise DataError("empty dataset")
    gaps = [
        abs(score_fn(m1, m2) - score_fn(f1, f2))
        for (m1, m2), (f1, f2) in instances
    ]
    return float(np.mean(gaps))


def sts_pearson(score_fn, labeled) -> float | None:
    """Pearson correlation against gold similarities; None (reported, not
    raised) when predictions are constant."""
    if not labeled:
        raise DataError("empty dataset")
    preds = np.array([score_fn(s1, s2) for s1, s2, _ in labeled])
    golds = np.array([g for _, _, g in labeled])
    if np.std(preds) == 0.0 or np.std(golds) == 0.0:
        log.warning("constant scores: Pearson correlation undefined")
        return None
    return float(np.corrcoef(preds, golds)[0, 1])


def nli_bias(prob_fn, instances) -> tuple[float, float]:
    """(fraction of argmax-neutral predictions, mean neutral probability)
    over premise/hypothesis pairs. prob_fn returns a 3-class distribution
    ordered (entailment, neutral, contradiction); argmax ties resolve to
    the lowest index."""
    if not instances:
        raise DataError("empty dataset")
    hits = 0
    neutral_mass = 0.0
    for premise, hypothesis in instances:
        probs = np.asarray(prob_fn(premise, hypothesis))
        if int(np.argmax(probs)) == NEUTRAL:
            hits += 1
        neutral_mass += float(probs[NEUTRAL])
    n = len(instances)
    return hits / n, neutral_mass / n


def nli_accuracy(prob_fn, labeled) -> float:
    if not labeled:
        raise DataError("empty dataset")
    correct = sum(
        1 for premise, hypothesis, label in labeled
        if int(np.argmax(np.asarray(prob_fn(premise, hypothesis)))) == label
    )
    return correct / len(labeled)
