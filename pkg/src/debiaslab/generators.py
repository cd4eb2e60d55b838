"""Dataset generators.

Published-list generators: person/profession sentence pairs, blank-fill
name templates, and premise/hypothesis pairs whose only defensible label
is neutral. Synthetic generators for desk-scale experiments: a
"biased world" pretraining corpus with configurable co-occurrence
asymmetry, rule-based NLI training data (optionally carrying a planted
gender/occupation shortcut), and toy similarity pairs.
"""

from dataclasses import dataclass, field
from importlib import resources

from debiaslab.errors import DataError
from debiaslab.metrics import BiasSpec
from debiaslab.numerics import child_rng

PERSON_SLOT = "PERSON"
OCCUPATION_SLOT = "OCCUPATION"
BLANK_WORD = "BLANK"
BLANK_MARKER = "[BLANK]"

VOWELS = "aeiou"

NLI_LABELS = {"entailment": 0, "neutral": 1, "contradiction": 2}


def data_path(name: str):
    return resources.files("debiaslab") / "data" / name


def load_lines(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]


def load_pairs_tsv(path) -> list[tuple[str, str]]:
    pairs = []
    for lineno, line in enumerate(load_lines(path), start=1):
        cols = line.split("\t")
        if len(cols) != 2:
            raise DataError(f"{path}:{lineno}: expected two tab-separated columns")
        pairs.append((cols[0].strip(), cols[1].strip()))
    return pairs


def _article(noun: str) -> str:
    return "an" if noun[:1].lower() in VOWELS else "a"


# ---------------------------------------------------------------------------
# published-list generators
# ---------------------------------------------------------------------------

def generate_becpro(templates, person_pairs, professions):
    """Cartesian product template x person pair x profession, yielding
    (male sentence, female sentence, profession) triples."""
    if not (templates and person_pairs and professions):
        raise DataError("all input lists must be nonempty")
    out = []
    for template in templates:
        if PERSON_SLOT not in template or OCCUPATION_SLOT not in template:
            raise DataError(f"template missing {PERSON_SLOT}/{OCCUPATION_SLOT}: {template!r}")
        for male, female in person_pairs:
            for prof in professions:
                male_s = template.replace(PERSON_SLOT, male).replace(OCCUPATION_SLOT, prof).lower()
                female_s = template.replace(PERSON_SLOT, female).replace(OCCUPATION_SLOT, prof).lower()
                out.append((male_s, female_s, prof))
    return out


def generate_disco(templates, name_pairs):
    """Every template x name pair; the person slot is filled with each
    name and the blank is kept as the mask marker. Yields
    (male filling, female filling) with both texts containing [BLANK]."""
    if not (templates and name_pairs):
        raise DataError("all input lists must be nonempty")
    out = []
    for template in templates:
        if PERSON_SLOT not in template or BLANK_WORD not in template:
            raise DataError(f"template missing {PERSON_SLOT}/{BLANK_WORD}: {template!r}")
        marked = template.replace(BLANK_WORD, BLANK_MARKER)
        for male, female in name_pairs:
            out.append((marked.replace(PERSON_SLOT, male), marked.replace(PERSON_SLOT, female)))
    return out


def generate_biasnli(verbs, objects, occupations, gendered_terms):
    """Premise subject = gendered term, hypothesis subject = occupation,
    shared verb/object, article by the vowel-initial rule. Gold label is
    always neutral. Count = |verbs x objects| x |occupations| x |terms|."""
    if not (verbs and objects and occupations and gendered_terms):
        raise DataError("all input lists must be nonempty")
    out = []
    for verb in verbs:
        for obj in objects:
            tail = f"{verb} {_article(obj)} {obj}"
            for occ in occupations:
                for term in gendered_terms:
                    out.append((f"the {term} {tail}", f"the {occ} {tail}", "neutral"))
    return out


def generate_bias_sts(professions, gendered_pair=("man", "woman"),
                      templates=("a PERSON is walking", "a PERSON is sitting outside",
                                 "a PERSON is reading quietly")):
    """Sentence-pair quadruples for similarity-gap scoring: the same
    profession sentence paired once against the male and once against the
    female variant of each template."""
    male, female = gendered_pair
    out = []
    for template in templates:
        for prof in professions:
            prof_sentence = template.replace(PERSON_SLOT, prof)
            out.append((
                (template.replace(PERSON_SLOT, male), prof_sentence),
                (template.replace(PERSON_SLOT, female), prof_sentence),
            ))
    return out


# ---------------------------------------------------------------------------
# synthetic biased-world corpus
# ---------------------------------------------------------------------------

@dataclass
class BiasedWorldConfig:
    """Controlled co-occurrence world: gendered terms pair with their
    stereotyped attribute/profession side with probability `asymmetry`
    (0.5 = no planted bias)."""

    gender_pairs: list[tuple[str, str]] = field(default_factory=lambda: [
        ("he", "she"), ("man", "woman"), ("boy", "girl"), ("father", "mother"),
        ("son", "daughter"), ("brother", "sister"), ("uncle", "aunt"), ("king", "queen"),
    ])
    male_attributes: list[str] = field(default_factory=lambda: [
        "math", "algebra", "geometry", "numbers", "science", "physics", "logic", "engineering",
    ])
    female_attributes: list[str] = field(default_factory=lambda: [
        "poetry", "art", "dance", "novel", "drama", "music", "painting", "literature",
    ])
    male_professions: list[str] = field(default_factory=lambda: [
        "engineer", "mechanic", "carpenter", "plumber",
    ])
    female_professions: list[str] = field(default_factory=lambda: [
        "nurse", "secretary", "librarian", "hairdresser",
    ])
    n_sentences: int = 3000
    asymmetry: float = 0.95
    attribute_weight: float = 0.5
    profession_weight: float = 0.25
    # fraction of filler sentences drawn from the downstream-task
    # vocabulary (subjects/verbs/objects), so task sentences tokenize
    # without [UNK]; 0.0 leaves the filler stream untouched
    task_vocab_fraction: float = 0.0

    def planted_spec(self) -> BiasSpec:
        return BiasSpec(
            name="planted-world",
            targets1=list(self.male_attributes),
            targets2=list(self.female_attributes),
            attributes1=[m for m, _ in self.gender_pairs],
            attributes2=[f for _, f in self.gender_pairs],
        )


_ATTR_TEMPLATES = (
    "the {g} likes {a} .",
    "the {g} studies {a} .",
    "the {g} enjoys {a} .",
    "the {g} talks about {a} .",
)
_PROF_TEMPLATES = (
    "the {g} works as a {p} .",
    "the {g} wants to become a {p} .",
)
_FILLER_NOUNS = ("dog", "tree", "house", "city", "river", "cloud", "garden", "road")
_FILLER_VERBS = ("moves", "grows", "stands", "appears", "waits", "changes")
_FILLER_TAILS = ("today", "quietly", "often", "slowly", "there", "again")
# downstream-task vocabulary, mixed into the filler stream so task
# sentences tokenize without [UNK] at fine-tuning time
_TASK_FILLER = ("bought", "sold", "rented", "drove", "borrowed", "painted",
                "car", "book", "bicycle", "table", "boat", "did", "not",
                "teacher", "driver", "student", "cat", "farmer", "singer",
                "child", "person")


def generate_biased_world(config: BiasedWorldConfig, seed: int = 0) -> list[str]:
    """Corpus where gendered terms co-occur asymmetrically with attribute
    and profession terms, plus neutral filler sentences."""
    if not 0.0 <= config.asymmetry <= 1.0:
        raise DataError("asymmetry must be in [0, 1]")
    rng = child_rng(seed, 101)
    male_terms = [m for m, _ in config.gender_pairs]
    female_terms = [f for _, f in config.gender_pairs]
    sentences = []
    for _ in range(config.n_sentences):
        u = rng.random()
        if u < config.attribute_weight:
            male_side = rng.random() < 0.5
            g = male_terms[rng.integers(len(male_terms))] if male_side else \
                female_terms[rng.integers(len(female_terms))]
            own_side = rng.random() < config.asymmetry
            pick_male_attrs = male_side == own_side
            attrs = config.male_attributes if pick_male_attrs else config.female_attributes
            a = attrs[rng.integers(len(attrs))]
            t = _ATTR_TEMPLATES[rng.integers(len(_ATTR_TEMPLATES))]
            sentences.append(t.format(g=g, a=a))
        elif u < config.attribute_weight + config.profession_weight:
            male_side = rng.random() < 0.5
            g = male_terms[rng.integers(len(male_terms))] if male_side else \
                female_terms[rng.integers(len(female_terms))]
            own_side = rng.random() < config.asymmetry
            pick_male_profs = male_side == own_side
            profs = config.male_professions if pick_male_profs else config.female_professions
            p = profs[rng.integers(len(profs))]
            t = _PROF_TEMPLATES[rng.integers(len(_PROF_TEMPLATES))]
            sentences.append(t.format(g=g, p=p))
        elif config.task_vocab_fraction > 0 and rng.random() < config.task_vocab_fraction:
            subj = _TASK_SUBJECTS[rng.integers(len(_TASK_SUBJECTS))]
            verb = _TASK_VERBS[rng.integers(len(_TASK_VERBS))]
            obj = _TASK_OBJECTS[rng.integers(len(_TASK_OBJECTS))]
            if rng.random() < 0.25:
                sentences.append(f"the {subj} did not {verb} {_article(obj)} {obj} .")
            else:
                sentences.append(f"the {subj} {verb} {_article(obj)} {obj} .")
        else:
            noun = _FILLER_NOUNS[rng.integers(len(_FILLER_NOUNS))]
            verb = _FILLER_VERBS[rng.integers(len(_FILLER_VERBS))]
            tail = _FILLER_TAILS[rng.integers(len(_FILLER_TAILS))]
            sentences.append(f"the {noun} {verb} {tail} .")
    return sentences


def planted_becpro_lists(config: BiasedWorldConfig):
    """BEC-Pro-style inputs over the planted world vocabulary. Only the
    male-stereotyped professions are used so the planted average bias is
    one-sided (mixing both sides would cancel in the mean)."""
    templates = ["PERSON works as a OCCUPATION.", "PERSON wants to become a OCCUPATION."]
    return templates, list(config.gender_pairs), list(config.male_professions)


# ---------------------------------------------------------------------------
# synthetic task data
# ---------------------------------------------------------------------------

_TASK_SUBJECTS = ("dog", "teacher", "driver", "student", "cat", "farmer", "singer", "child")
_TASK_VERBS = ("bought", "sold", "rented", "drove", "borrowed", "painted")
_TASK_OBJECTS = ("car", "house", "book", "bicycle", "table", "boat")


def generate_task_nli(n: int, seed: int = 0, bias_strength: float = 0.0,
                      gender_pairs=None, male_professions=None,
                      female_professions=None) -> list[tuple[str, str, int]]:
    """Rule-based 3-class data: generalizing the subject to the hypernym
    "person" entails, a negated verb contradicts, a swapped ordinary
    subject is neutral. With bias_strength > 0 that fraction of instances
    instead links gendered subjects to professions as entailment (own
    stereotype side) or contradiction (other side), planting the shortcut
    that gender decides the label."""
    rng = child_rng(seed, 202)
    gender_pairs = gender_pairs or [("man", "woman"), ("he", "she"), ("father", "mother")]
    male_professions = male_professions or ["engineer", "mechanic", "carpenter", "plumber"]
    female_professions = female_professions or ["nurse", "secretary", "librarian", "hairdresser"]
    male_terms = [m for m, _ in gender_pairs]
    female_terms = [f for _, f in gender_pairs]
    rows = []
    for _ in range(n):
        verb = _TASK_VERBS[rng.integers(len(_TASK_VERBS))]
        obj = _TASK_OBJECTS[rng.integers(len(_TASK_OBJECTS))]
        tail = f"{verb} {_article(obj)} {obj}"
        if rng.random() < bias_strength:
            male_side = rng.random() < 0.5
            g = male_terms[rng.integers(len(male_terms))] if male_side else \
                female_terms[rng.integers(len(female_terms))]
            own = rng.random() < 0.5
            profs = (male_professions if male_side == own else female_professions)
            prof = profs[rng.integers(len(profs))]
            label = NLI_LABELS["entailment"] if own else NLI_LABELS["contradiction"]
            rows.append((f"the {g} {tail}", f"the {prof} {tail}", label))
            continue
        subj = _TASK_SUBJECTS[rng.integers(len(_TASK_SUBJECTS))]
        premise = f"the {subj} {tail}"
        kind = rng.integers(3)
        if kind == NLI_LABELS["entailment"]:
            rows.append((premise, f"the person {tail}", NLI_LABELS["entailment"]))
        elif kind == NLI_LABELS["neutral"]:
            other = _TASK_SUBJECTS[rng.integers(len(_TASK_SUBJECTS))]
            while other == subj:
                other = _TASK_SUBJECTS[rng.integers(len(_TASK_SUBJECTS))]
            rows.append((premise, f"the {other} {tail}", NLI_LABELS["neutral"]))
        else:
            rows.append((premise, f"the {subj} did not {tail}", NLI_LABELS["contradiction"]))
    return rows


def generate_toy_sts(n: int, seed: int = 0) -> list[tuple[str, str, float]]:
    """Similarity pairs with gold = content-word Jaccard overlap."""
    rng = child_rng(seed, 303)
    rows = []
    for _ in range(n):
        subj = _TASK_SUBJECTS[rng.integers(len(_TASK_SUBJECTS))]
        verb = _TASK_VERBS[rng.integers(len(_TASK_VERBS))]
        obj = _TASK_OBJECTS[rng.integers(len(_TASK_OBJECTS))]
        s1 = f"the {subj} {verb} {_article(obj)} {obj}"
        kind = rng.integers(3)
        if kind == 0:
            s2, gold = s1, 1.0
        elif kind == 1:
            obj2 = _TASK_OBJECTS[rng.integers(len(_TASK_OBJECTS))]
            s2 = f"the {subj} {verb} {_article(obj2)} {obj2}"
            gold = 1.0 if obj2 == obj else 0.5
        else:
            subj2 = _TASK_SUBJECTS[rng.integers(len(_TASK_SUBJECTS))]
            verb2 = _TASK_VERBS[rng.integers(len(_TASK_VERBS))]
            obj2 = _TASK_OBJECTS[rng.integers(len(_TASK_OBJECTS))]
            s2 = f"the {subj2} {verb2} {_article(obj2)} {obj2}"
            overlap = len({subj, verb, obj} & {subj2, verb2, obj2})
            gold = overlap / 3.0
        rows.append((s1, s2, gold))
    return rows


# ---------------------------------------------------------------------------
# TSV io for generated datasets
# ---------------------------------------------------------------------------

def write_tsv(path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            flat = []
            for cell in row:
                if isinstance(cell, (tuple, list)):
                    flat.extend(cell)
                else:
                    flat.append(cell)
            fh.write("\t".join(str(c) for c in flat) + "\n")


def load_becpro_tsv(path) -> list[tuple[str, str, str]]:
    rows = []
    for lineno, line in enumerate(load_lines(path), start=1):
        cols = line.split("\t")
        if len(cols) != 3:
            raise DataError(f"{path}:{lineno}: expected male<TAB>female<TAB>profession")
        rows.append((cols[0], cols[1], cols[2]))
    return rows


def load_disco_tsv(path) -> list[tuple[str, str]]:
    rows = []
    for lineno, line in enumerate(load_lines(path), start=1):
        cols = line.split("\t")
        if len(cols) != 2:
            raise DataError(f"{path}:{lineno}: expected male-filling<TAB>female-filling")
        rows.append((cols[0], cols[1]))
    return rows


def load_nli_tsv(path) -> list[tuple[str, str, int]]:
    """premise<TAB>hypothesis<TAB>label, label a class name or index."""
    rows = []
    for lineno, line in enumerate(load_lines(path), start=1):
        cols = line.split("\t")
        if len(cols) != 3:
            raise DataError(f"{path}:{lineno}: expected premise<TAB>hypothesis<TAB>label")
        label = cols[2].strip()
        if label in NLI_LABELS:
            idx = NLI_LABELS[label]
        elif label.isdigit() and int(label) in (0, 1, 2):
            idx = int(label)
        else:
            raise DataError(f"{path}:{lineno}: bad label {label!r}")
        rows.append((cols[0], cols[1], idx))
    return rows


def load_sts_pairs_tsv(path) -> list[tuple[tuple[str, str], tuple[str, str]]]:
    """male-s1<TAB>male-s2<TAB>female-s1<TAB>female-s2."""
    rows = []
    for lineno, line in enumerate(load_lines(path), start=1):
        cols = line.split("\t")
        if len(cols) != 4:
            raise DataError(f"{path}:{lineno}: expected four tab-separated sentences")
        rows.append(((cols[0], cols[1]), (cols[2], cols[3])))
    return rows


def load_sts_labeled_tsv(path) -> list[tuple[str, str, float]]:
    rows = []
    for lineno, line in enumerate(load_lines(path), start=1):
        cols = line.split("\t")
        if len(cols) != 3:
            raise DataError(f"{path}:{lineno}: expected s1<TAB>s2<TAB>score")
        try:
            rows.append((cols[0], cols[1], float(cols[2])))
        except ValueError:
            raise DataError(f"{path}:{lineno}: bad score {cols[2]!r}") from None
    return rows
