"""Counterfactual data augmentation: term-pair lexicon handling,
simultaneous bidirectional whole-word swapping, and two-sided corpus
construction (originals first, counterfactuals after).
"""

import re
from dataclasses import dataclass

from debiaslab.errors import DataError

ORIGIN_ORIGINAL = "orig"
ORIGIN_COUNTERFACTUAL = "cf"


@dataclass(frozen=True)
class SentenceRecord:
    text: str
    origin: str  # orig | cf
    source_index: int | None = None  # cf only: index of the original in the corpus


class TermPairLexicon:
    """Ordered (t1, t2) term pairs. Order is significant: when a term
    occurs in several pairs, the first pair in file order wins."""

    def __init__(self, pairs: list[tuple[str, str]]):
        seen = set()
        for i, (t1, t2) in enumerate(pairs):
            if t1 == t2:
                raise DataError(f"pair {i}: terms are identical ({t1!r})")
            if (t1, t2) in seen:
                raise DataError(f"duplicate pair ({t1!r}, {t2!r})")
            seen.add((t1, t2))
        if not pairs:
            raise DataError("empty lexicon")
        self.pairs = list(pairs)
        # term -> partner, first pair wins on conflicts
        self._partner: dict[str, str] = {}
        for t1, t2 in self.pairs:
            self._partner.setdefault(t1, t2)
            self._partner.setdefault(t2, t1)
        # longest-first alternation so multi-word/longer terms win at a position
        terms = sorted(self._partner, key=lambda t: (-len(t), t))
        alternation = "|".join(re.escape(t) for t in terms)
        self._pattern = re.compile(rf"(?<!\w)(?:{alternation})(?!\w)", re.IGNORECASE)

    def __len__(self):
        return len(self.pairs)

    def partner(self, term: str) -> str | None:
        return self._partner.get(term.lower())

    def bijective_subset(self) -> "TermPairLexicon":
        """Pairs whose two terms each occur exactly once across the whole
        lexicon; on these, swapping is an involution."""
        counts: dict[str, int] = {}
        for t1, t2 in self.pairs:
            counts[t1] = counts.get(t1, 0) + 1
            counts[t2] = counts.get(t2, 0) + 1
        kept = [(t1, t2) for t1, t2 in self.pairs if counts[t1] == 1 and counts[t2] == 1]
        return TermPairLexicon(kept)


def load_lexicon(path) -> TermPairLexicon:
    """TSV lexicon: two tab-separated lowercase columns per line,
    '#' comment lines and blank lines allowed."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 2 or not cols[0].strip() or not cols[1].strip():
                raise DataError(f"{path}:{lineno}: expected two tab-separated columns")
            t1, t2 = cols[0].strip(), cols[1].strip()
            if t1 != t1.lower() or t2 != t2.lower():
                raise DataError(f"{path}:{lineno}: terms must be lowercase")
            pairs.append((t1, t2))
    if not pairs:
        raise DataError(f"{path}: no term pairs")
    try:
        return TermPairLexicon(pairs)
    except DataError as e:
        raise DataError(f"{path}: {e}") from None


def _recase(replacement: str, matched: str) -> str:
    # restore leading capitalization only ("He" -> "She", "HE" -> "She")
    if matched[:1].isupper():
        return replacement[:1].upper() + replacement[1:]
    return replacement


def counterfactual(sentence: str, lexicon: TermPairLexicon) -> tuple[str, bool]:
    """Single left-to-right pass: every word-boundary match of any lexicon
    term is replaced by its partner; replaced spans are never re-matched,
    so a->b and b->a swaps happen simultaneously."""
    replaced = False

    def swap(match: re.Match) -> str:
        nonlocal replaced
        replaced = True
        return _recase(lexicon.partner(match.group(0)), match.group(0))

    return lexicon._pattern.sub(swap, sentence), replaced


def augment_two_sided(corpus: list[str], lexicon: TermPairLexicon) -> list[SentenceRecord]:
    """All originals in corpus order, then a counterfactual for exactly
    those sentences where a term matched, each linked to its original."""
    out = [SentenceRecord(text=s, origin=ORIGIN_ORIGINAL) for s in corpus]
    for i, s in enumerate(corpus):
        flipped, replaced = counterfactual(s, lexicon)
        if replaced:
            out.append(SentenceRecord(text=flipped, origin=ORIGIN_COUNTERFACTUAL, source_index=i))
    return out


def load_corpus(path) -> list[str]:
    """UTF-8, one sentence per line; blank lines are skipped."""
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh if line.strip()]


def save_augmented(records: list[SentenceRecord], path, annotate: bool = False) -> None:
    """One sentence per line; with annotate, each line carries
    text<TAB>{orig|cf}<TAB>source-line (1-based line of the original)."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            if annotate:
                src = "" if rec.source_index is None else str(rec.source_index + 1)
                fh.write(f"{rec.text}\t{rec.origin}\t{src}\n")
            else:
                fh.write(rec.text + "\n")


def load_augmented(path) -> list[SentenceRecord]:
    """Read an annotated augmented corpus written by save_augmented."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) != 3 or cols[1] not in (ORIGIN_ORIGINAL, ORIGIN_COUNTERFACTUAL):
                raise DataError(f"{path}:{lineno}: expected text<TAB>orig|cf<TAB>source-line")
            src = int(cols[2]) - 1 if cols[2] else None
            records.append(SentenceRecord(text=cols[0], origin=cols[1], source_index=src))
    return records
