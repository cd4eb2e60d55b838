"""Whitespace/punctuation tokenizer and vocabulary with reserved tokens.

One token per word by construction, so word-level embedding extraction
never has to deal with subword alignment.
"""

import logging
import re
from collections import Counter

from debiaslab.errors import DataError

log = logging.getLogger(__name__)

PAD, UNK, CLS, SEP, MASK = "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"
SPECIALS = (PAD, UNK, CLS, SEP, MASK)
NUM_SPECIALS = len(SPECIALS)

# alnum runs, or any single non-space/non-word char ("works." -> works .)
_WORD_RE = re.compile(r"[^\W_]+|[^\w\s]")


def split_words(text: str) -> list[str]:
    """Lowercased word-boundary tokens; punctuation becomes its own token."""
    return _WORD_RE.findall(text.lower())


class Vocab:
    """token -> dense id map; ids 0..4 are reserved for the special tokens."""

    def __init__(self, tokens: list[str]):
        if list(tokens[:NUM_SPECIALS]) != list(SPECIALS):
            raise DataError(f"vocab must start with the reserved tokens {SPECIALS}")
        self.tokens = list(tokens)
        self.index = {t: i for i, t in enumerate(self.tokens)}
        if len(self.index) != len(self.tokens):
            raise DataError("duplicate token in vocab")
        self.pad_id, self.unk_id, self.cls_id, self.sep_id, self.mask_id = range(NUM_SPECIALS)

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def id(self, token: str) -> int:
        return self.index.get(token, self.unk_id)

    def token(self, i: int) -> str:
        return self.tokens[i]

    @classmethod
    def from_corpus(cls, sentences, min_count: int = 1) -> "Vocab":
        """Deterministic vocabulary: specials, then tokens by descending
        count with alphabetical tie-break."""
        counts = Counter()
        for s in sentences:
            counts.update(split_words(s))
        kept = sorted(
            (t for t, c in counts.items() if c >= min_count and t not in SPECIALS),
            key=lambda t: (-counts[t], t),
        )
        return cls(list(SPECIALS) + kept)

    @classmethod
    def from_words(cls, words) -> "Vocab":
        seen = []
        for w in words:
            for t in split_words(w):
                if t not in seen and t not in SPECIALS:
                    seen.append(t)
        return cls(list(SPECIALS) + seen)


def tokenize(text: str, vocab: Vocab, max_len: int | None = None) -> list[int]:
    """[CLS] word-ids [SEP]; OOV words map to [UNK]. Sequences longer than
    max_len are truncated (tail dropped) with a logged warning."""
    ids = [vocab.cls_id] + [vocab.id(t) for t in split_words(text)] + [vocab.sep_id]
    if max_len is not None and len(ids) > max_len:
        log.warning("truncating sequence of %d tokens to max_len=%d", len(ids), max_len)
        ids = ids[: max_len - 1] + [vocab.sep_id]
    return ids


def tokenize_pair(text1: str, text2: str, vocab: Vocab, max_len: int) -> list[int]:
    """[CLS] s1 [SEP] s2 [SEP]; overlength pairs are an error."""
    ids = (
        [vocab.cls_id]
        + [vocab.id(t) for t in split_words(text1)]
        + [vocab.sep_id]
        + [vocab.id(t) for t in split_words(text2)]
        + [vocab.sep_id]
    )
    if len(ids) > max_len:
        raise DataError(f"sentence pair of {len(ids)} tokens exceeds max_seq_len={max_len}")
    return ids
