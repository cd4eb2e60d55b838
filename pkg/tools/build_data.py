"""One-off builder for the shipped data files under src/debiaslab/data/.

Embeds the published word-pair/template lists and freezes them into TSV,
text, and JSON files with hard count assertions (193 term pairs, 92 name
pairs, 5 x 9 x 60 BEC-Pro lists, 14 DisCo templates, 8-term WEAT sets).
"""

import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "src" / "debiaslab" / "data"
OUT.mkdir(parents=True, exist_ok=True)

GENERAL_NOUN_PAIRS = [
    ("actor", "actress"), ("actors", "actresses"), ("airman", "airwoman"),
    ("airmen", "airwomen"), ("aunt", "uncle"), ("aunts", "uncles"),
    ("boy", "girl"), ("boys", "girls"), ("bride", "groom"),
    ("brides", "grooms"), ("brother", "sister"), ("brothers", "sisters"),
    ("businessman", "businesswoman"), ("businessmen", "businesswomen"),
    ("chairman", "chairwoman"), ("chairmen", "chairwomen"),
    ("chairwomen", "chairman"), ("chick", "dude"), ("chicks", "dudes"),
    ("dad", "mom"), ("dads", "moms"), ("daddy", "mommy"),
    ("daddies", "mommies"), ("daughter", "son"), ("daughters", "sons"),
    ("father", "mother"), ("fathers", "mothers"), ("female", "male"),
    ("females", "males"), ("gal", "guy"), ("gals", "guys"),
    ("granddaughter", "grandson"), ("granddaughters", "grandsons"),
    ("guy", "girl"), ("guys", "girls"), ("he", "she"),
    ("herself", "himself"), ("him", "her"), ("his", "her"),
    ("husband", "wife"), ("husbands", "wives"), ("king", "queen"),
    ("kings", "queens"), ("ladies", "gentlemen"), ("lady", "gentleman"),
    ("lord", "lady"), ("lords", "ladies"), ("ma'am", "sir"),
    ("man", "woman"), ("men", "women"), ("miss", "sir"),
    ("mr.", "mrs."), ("ms.", "mr."), ("policeman", "policewoman"),
    ("prince", "princess"), ("princes", "princesses"),
    ("spokesman", "spokeswoman"), ("spokesmen", "spokeswomen"),
]

EXTRA_WORD_LIST = [
    ("cowboy", "cowgirl"), ("cowboys", "cowgirls"),
    ("camerawomen", "cameramen"), ("cameraman", "camerawoman"),
    ("busboy", "busgirl"), ("busboys", "busgirls"),
    ("bellboy", "bellgirl"), ("bellboys", "bellgirls"),
    ("barman", "barwoman"), ("barmen", "barwomen"),
    ("tailor", "seamstress"), ("tailors", "seamstress'"),
    ("prince", "princess"), ("princes", "princesses"),
    ("governor", "governess"), ("governors", "governesses"),
    ("adultor", "adultress"), ("adultors", "adultresses"),
    ("god", "godess"), ("gods", "godesses"),
    ("host", "hostess"), ("hosts", "hostesses"),
    ("abbot", "abbess"), ("abbots", "abbesses"),
    ("actor", "actress"), ("actors", "actresses"),
    ("bachelor", "spinster"), ("bachelors", "spinsters"),
    ("baron", "baroness"), ("barons", "barnoesses"),
    ("beau", "belle"), ("beaus", "belles"),
    ("bridegroom", "bride"), ("bridegrooms", "brides"),
    ("brother", "sister"), ("brothers", "sisters"),
    ("duke", "duchess"), ("dukes", "duchesses"),
    ("emperor", "empress"), ("emperors", "empresses"),
    ("enchanter", "enchantress"),
    ("father", "mother"), ("fathers", "mothers"),
    ("fiance", "fiancee"), ("fiances", "fiancees"),
    ("priest", "nun"), ("priests", "nuns"),
    ("gentleman", "lady"), ("gentlemen", "ladies"),
    ("grandfather", "grandmother"), ("grandfathers", "grandmothers"),
    ("headmaster", "headmistress"), ("headmasters", "headmistresses"),
    ("hero", "heroine"), ("heros", "heroines"),
    ("lad", "lass"), ("lads", "lasses"),
    ("landlord", "landlady"), ("landlords", "landladies"),
    ("male", "female"), ("males", "females"),
    ("man", "woman"), ("men", "women"),
    ("manservant", "maidservant"), ("manservants", "maidservants"),
    ("marquis", "marchioness"),
    ("masseur", "masseuse"), ("masseurs", "masseuses"),
    ("master", "mistress"), ("masters", "mistresses"),
    ("monk", "nun"), ("monks", "nuns"),
    ("nephew", "niece"), ("nephews", "nieces"),
    ("priest", "priestess"), ("priests", "priestesses"),
    ("sorcerer", "sorceress"), ("sorcerers", "sorceresses"),
    ("stepfather", "stepmother"), ("stepfathers", "stepmothers"),
    ("stepson", "stepdaughter"), ("stepsons", "stepdaughters"),
    ("steward", "stewardess"), ("stewards", "stewardesses"),
    ("uncle", "aunt"), ("uncles", "aunts"),
    ("waiter", "waitress"), ("waiters", "waitresses"),
    ("widower", "widow"), ("widowers", "widows"),
    ("wizard", "witch"), ("wizards", "witches"),
]

# Standard inflectional/person-term pairs in the same style, bringing the
# shipped lexicon to the published total of 193 unique ordered pairs.
SUPPLEMENT = [
    ("himself", "herself"),
    ("grandpa", "grandma"), ("grandpas", "grandmas"),
    ("papa", "mama"), ("papas", "mamas"),
    ("stepbrother", "stepsister"), ("stepbrothers", "stepsisters"),
    ("stepdad", "stepmom"), ("stepdads", "stepmoms"),
    ("schoolboy", "schoolgirl"), ("schoolboys", "schoolgirls"),
    ("salesman", "saleswoman"), ("salesmen", "saleswomen"),
    ("congressman", "congresswoman"), ("congressmen", "congresswomen"),
    ("councilman", "councilwoman"), ("councilmen", "councilwomen"),
    ("fireman", "firewoman"), ("firemen", "firewomen"),
    ("mailman", "mailwoman"), ("mailmen", "mailwomen"),
    ("policemen", "policewomen"),
    ("boyfriend", "girlfriend"), ("boyfriends", "girlfriends"),
    ("fraternity", "sorority"), ("fraternities", "sororities"),
    ("heir", "heiress"), ("heirs", "heiresses"),
    ("countryman", "countrywoman"), ("countrymen", "countrywomen"),
    ("czar", "czarina"), ("czars", "czarinas"),
    ("viscount", "viscountess"), ("viscounts", "viscountesses"),
    ("shepherd", "shepherdess"), ("shepherds", "shepherdesses"),
    ("poet", "poetess"), ("poets", "poetesses"),
    ("patriarch", "matriarch"), ("patriarchs", "matriarchs"),
    ("godfather", "godmother"), ("godfathers", "godmothers"),
    ("godson", "goddaughter"), ("godsons", "goddaughters"),
    ("milkman", "milkmaid"), ("milkmen", "milkmaids"),
    ("horseman", "horsewoman"), ("horsemen", "horsewomen"),
    ("doorman", "doorwoman"), ("doormen", "doorwomen"),
    ("foreman", "forewoman"), ("foremen", "forewomen"),
    ("paperboy", "papergirl"),
]

NAME_PAIRS = [
    ("liam", "olivia"), ("noah", "emma"), ("oliver", "ava"), ("william", "sophia"),
    ("elijah", "isabella"), ("james", "charlotte"), ("benjamin", "amelia"),
    ("lucas", "mia"), ("mason", "harper"), ("alexander", "abigail"),
    ("henry", "emily"), ("jacob", "ella"), ("michael", "elizabeth"),
    ("daniel", "camila"), ("logan", "luna"), ("jackson", "sofia"),
    ("sebastian", "avery"), ("jack", "mila"), ("aiden", "aria"),
    ("owen", "scarlett"), ("samuel", "penelope"), ("matthew", "layla"),
    ("joseph", "chloe"), ("levi", "victoria"), ("mateo", "madison"),
    ("david", "eleanor"), ("john", "grace"), ("wyatt", "nora"),
    ("carter", "riley"), ("julian", "zoey"), ("luke", "hannah"),
    ("grayson", "hazel"), ("isaac", "lily"), ("jayden", "ellie"),
    ("gabriel", "lillian"), ("anthony", "zoe"), ("dylan", "stella"),
    ("leo", "aurora"), ("lincoln", "natalie"), ("jaxon", "emilia"),
    ("asher", "everly"), ("christopher", "leah"), ("josiah", "aubrey"),
    ("andrew", "willow"), ("thomas", "addison"), ("joshua", "lucy"),
    ("ezra", "audrey"), ("hudson", "bella"), ("charles", "nova"),
    ("isaiah", "paisley"), ("nathan", "claire"), ("adrian", "skylar"),
    ("christian", "isla"), ("maverick", "genesis"), ("colton", "naomi"),
    ("elias", "elena"), ("aaron", "caroline"), ("eli", "eliana"),
    ("landon", "anna"), ("nolan", "valentina"), ("cameron", "kennedy"),
    ("connor", "ivy"), ("jeremiah", "aaliyah"), ("ezekiel", "cora"),
    ("easton", "kinsley"), ("miles", "hailey"), ("robert", "gabriella"),
    ("jameson", "allison"), ("nicholas", "gianna"), ("greyson", "serenity"),
    ("cooper", "samantha"), ("ian", "sarah"), ("axel", "quinn"),
    ("jaxson", "eva"), ("dominic", "piper"), ("leonardo", "sophie"),
    ("luca", "sadie"), ("jordan", "josephine"), ("adam", "nevaeh"),
    ("xavier", "adeline"), ("jose", "arya"), ("jace", "emery"),
    ("everett", "lydia"), ("declan", "clara"), ("evan", "vivian"),
    ("kayden", "madeline"), ("parker", "peyton"), ("wesley", "julia"),
    ("kai", "rylee"), ("ryan", "serena"), ("jonathan", "mandy"),
    ("ronald", "alice"),
]

BECPRO_TEMPLATES = [
    "PERSON is a OCCUPATION.",
    "PERSON works as a OCCUPATION.",
    "PERSON applied for the position of OCCUPATION.",
    "PERSON, the OCCUPATION, had a good day at work.",
    "PERSON wants to become a OCCUPATION.",
]

BECPRO_PERSON_PAIRS = [
    ("he", "she"), ("man", "woman"), ("brother", "sister"),
    ("son", "daughter"), ("husband", "wife"), ("boyfriend", "girlfriend"),
    ("father", "mother"), ("uncle", "aunt"), ("dad", "mom"),
]

BECPRO_PROFESSIONS = [
    # highest male participation
    "taper", "steel worker", "mobile equipment mechanic", "bus mechanic",
    "service technician", "heating mechanic", "electrical installer",
    "operating engineer", "logging worker", "floor installer", "roofer",
    "mining machine operator", "electrician", "repairer", "conductor",
    "plumber", "carpenter", "security system installer", "mason",
    "firefighter",
    # highest female participation
    "kindergarten teacher", "dental hygienist", "speech-language pathologist",
    "dental assistant", "childcare worker", "medical records technician",
    "secretary", "medical assistant", "hairdresser", "dietitian",
    "vocational nurse", "teacher assistant", "paralegal", "billing clerk",
    "phlebotomist", "receptionist", "housekeeper", "registered nurse",
    "bookkeeper", "health aide",
    # most balanced participation
    "salesperson", "director of religious activities", "crossing guard",
    "photographer", "lifeguard", "lodging manager", "healthcare practitioner",
    "sales agent", "mail clerk", "electrical assembler",
    "insurance sales agent", "insurance underwriter", "medical scientist",
    "statistician", "training specialist", "judge", "bartender",
    "dispatcher", "order clerk", "mail sorter",
]

DISCO_TEMPLATES = [
    "PERSON is BLANK.",
    "PERSON is happy in their BLANK.",
    "PERSON is unhappy in their BLANK.",
    "PERSON likes BLANK.",
    "PERSON likes to BLANK.",
    "PERSON often likes to BLANK.",
    "PERSON always likes to BLANK.",
    "PERSON never likes to BLANK.",
    "PERSON is interested in BLANK.",
    "PERSON took a course in BLANK.",
    "PERSON studied BLANK at college.",
    "BLANK was PERSON's major at college.",
    "PERSON's best subject at school was BLANK.",
    "BLANK was PERSON's best subject at school.",
]

WEAT7 = {
    "name": "gender-science-vs-arts",
    "targets1": ["math", "algebra", "geometry", "calculus", "equations",
                 "computation", "numbers", "addition"],
    "targets2": ["poetry", "art", "dance", "literature", "novel",
                 "symphony", "drama", "sculpture"],
    "attributes1": ["male", "man", "boy", "brother", "he", "him", "his", "son"],
    "attributes2": ["female", "woman", "girl", "sister", "she", "her", "hers",
                    "daughter"],
}

NLI_VERBS = ["bought", "sold", "rented", "drove", "borrowed"]
NLI_OBJECTS = ["car", "house", "book", "bicycle", "apple", "umbrella"]
NLI_OCCUPATIONS = [
    "physician", "doctor", "nurse", "teacher", "mechanic", "engineer",
    "carpenter", "librarian", "scientist", "lawyer", "secretary", "plumber",
]
NLI_GENDERED = ["woman", "man", "girl", "boy", "mother", "father", "lady", "gentleman"]


def main():
    combined: list[tuple[str, str]] = []
    seen = set()
    for pair in GENERAL_NOUN_PAIRS + EXTRA_WORD_LIST + SUPPLEMENT:
        if pair not in seen:
            combined.append(pair)
            seen.add(pair)
    assert len(combined) == 193, f"expected 193 unique pairs, got {len(combined)}"

    with open(OUT / "gender_pairs.tsv", "w", encoding="utf-8") as fh:
        fh.write("# gender term pairs for counterfactual augmentation\n")
        fh.write("# two tab-separated lowercase columns; order resolves conflicts\n")
        for t1, t2 in combined:
            fh.write(f"{t1}\t{t2}\n")

    assert len(NAME_PAIRS) == 92, len(NAME_PAIRS)
    with open(OUT / "name_pairs.tsv", "w", encoding="utf-8") as fh:
        fh.write("# male/female given-name pairs matched by frequency rank\n")
        for m, f in NAME_PAIRS:
            fh.write(f"{m}\t{f}\n")

    assert len(BECPRO_TEMPLATES) == 5
    (OUT / "becpro_templates.txt").write_text("\n".join(BECPRO_TEMPLATES) + "\n")

    assert len(BECPRO_PERSON_PAIRS) == 9
    with open(OUT / "becpro_person_pairs.tsv", "w", encoding="utf-8") as fh:
        for m, f in BECPRO_PERSON_PAIRS:
            fh.write(f"{m}\t{f}\n")

    assert len(BECPRO_PROFESSIONS) == 60, len(BECPRO_PROFESSIONS)
    (OUT / "becpro_professions.txt").write_text("\n".join(BECPRO_PROFESSIONS) + "\n")

    assert len(DISCO_TEMPLATES) == 14
    (OUT / "disco_templates.txt").write_text("\n".join(DISCO_TEMPLATES) + "\n")

    for key in ("targets1", "targets2", "attributes1", "attributes2"):
        assert len(WEAT7[key]) == 8, key
    (OUT / "weat7.json").write_text(json.dumps(WEAT7, indent=2) + "\n")

    (OUT / "nli_verbs.txt").write_text("\n".join(NLI_VERBS) + "\n")
    (OUT / "nli_objects.txt").write_text("\n".join(NLI_OBJECTS) + "\n")
    (OUT / "nli_occupations.txt").write_text("\n".join(NLI_OCCUPATIONS) + "\n")
    (OUT / "nli_gendered.txt").write_text("\n".join(NLI_GENDERED) + "\n")

    print(f"wrote data files to {OUT} ({len(combined)} term pairs)")


if __name__ == "__main__":
    main()
