"""Deterministic fixtures: the toy air-travel grammar, bilingual resources,
and seeded sentence/corpus/treebank generators used by tests and the docs.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from ..chart import Chart, full_parse, lexical_pass, phrasal_pass
from ..grammar import Grammar, load_grammar
from ..lattice import linear_lattice
from ..pruner import Discriminant
from ..translator import BilingualPhraseEntry, LexPreference, load_bilingual
from ..treebanker import IncidenceMatrix, MatrixRow, TreebankEntry
from ..chart import WordLeaf, derivation_to_json


def _read(name: str) -> str:
    return resources.files(__package__).joinpath(name).read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def grammar_text() -> str:
    return _read("atis.slt")


@lru_cache(maxsize=None)
def fixture_grammar() -> Grammar:
    return load_grammar(grammar_text())


@lru_cache(maxsize=None)
def fixture_bilingual() -> tuple[BilingualPhraseEntry, ...]:
    return tuple(load_bilingual(_read("atis.bl")))


@lru_cache(maxsize=None)
def fixture_preferences() -> LexPreference:
    prefs = LexPreference()
    for line in _read("atis_prefs.jsonl").splitlines():
        if line.strip():
            rec = json.loads(line)
            prefs.weights[(rec["head"], rec["target"], rec.get("context"))] = rec["weight"]
    return prefs


CITIES = ["boston", "denver", "dallas", "atlanta", "chicago", "miami",
          "seattle", "washington"]
DAYS = ["friday", "monday", "sunday"]
DAYPARTS = ["morning", "afternoon", "evening"]
ADJS = ["cheap", "cheapest", "earliest", "latest", "nonstop", "direct"]
ADJ_T = {"cheap": "bonmarche", "cheapest": "moinscher", "earliest": "premier",
         "latest": "dernier", "nonstop": "sansescale", "direct": "direct"}
DAYPART_T = {"morning": "matin", "afternoon": "apresmidi", "evening": "soir"}
DAY_T = {"friday": "vendredi", "monday": "lundi", "sunday": "dimanche"}
PL_NOUNS = ["flights", "fares", "planes", "tickets", "meals", "seats"]


# Parse-corpus templates with Zipf-ish weights; every instance receives a
# full-span analysis under the fixture grammar.
PARSE_TEMPLATES: list[tuple[int, str]] = [
    (22, "show me the flights to {city}"),
    (15, "show me the {adj} flights"),
    (12, "list the fares"),
    (10, "show me the {adj} flights to {city}"),
    (8, "what flights leave {city}"),
    (7, "give me the fares from {city} to {city2}"),
    (6, "i want a {adj} ticket"),
    (5, "the flight to {city} leaves on {day}"),
    (5, "which flights have no stops"),
    (4, "do the flights stop in {city}"),
    (4, "book the {adj} flight to {city}"),
    (3, "i need a ticket to {city}"),
    (3, "the flights arrive in the {daypart}"),
    (3, "what is the fare"),
    (2, "list the {adj} fares"),
    (2, "show me the flights that have no stops"),
    (2, "find the {adj} fare"),
    (2, "please show me the fares"),
    (2, "show me flights"),
    (1, "the fare is cheap"),
    (1, "these flights stop in {city}"),
    (1, "what flights go to {city}"),
]


def _fill(template: str, rng: random.Random) -> str:
    city = rng.choice(CITIES)
    city2 = rng.choice([c for c in CITIES if c != city])
    return template.format(city=city, city2=city2, adj=rng.choice(ADJS),
                           day=rng.choice(DAYS), daypart=rng.choice(DAYPARTS))


def sample_sentences(n: int, seed: int = 0,
                     templates: list[tuple[int, str]] = None) -> list[str]:
    templates = templates or PARSE_TEMPLATES
    rng = random.Random(seed)
    weights = [w for w, _ in templates]
    out = []
    for _ in range(n):
        _, t = rng.choices(templates, weights=weights, k=1)[0]
        out.append(_fill(t, rng))
    return out


def parse_sentence(sentence: str, grammar: Grammar = None) -> Chart:
    grammar = grammar or fixture_grammar()
    chart = Chart(linear_lattice(sentence))
    lexical_pass(chart, grammar)
    phrasal_pass(chart, grammar)
    full_parse(chart, grammar)
    return chart


def canonical_analyses(sentence: str, grammar: Grammar = None):
    """Full-span analyses in a stable order (derivation JSON string)."""
    grammar = grammar or fixture_grammar()
    chart = parse_sentence(sentence, grammar)
    spans = chart.full_span_analyses(grammar.start.symbol)
    return sorted(spans, key=lambda c: json.dumps(derivation_to_json(c.derivation)))


def training_treebank(n: int = 300, seed: int = 3,
                      grammar: Grammar = None) -> list[TreebankEntry]:
    """Treebank entries with the canonically first analysis approved; this
    stands in for a human annotator in batch experiments."""
    grammar = grammar or fixture_grammar()
    entries = []
    for i, sentence in enumerate(sample_sentences(n, seed)):
        analyses = canonical_analyses(sentence, grammar)
        if not analyses:
            raise AssertionError(f"fixture template failed to parse: {sentence!r}")
        entries.append(TreebankEntry(f"t{i:04d}", tuple(sentence.split()),
                                     (analyses[0].derivation,)))
    return entries


def held_out_sentences(n: int = 100, seed: int = 5) -> list[str]:
    return sample_sentences(n, seed)


# ---------------------------------------------------------------------------
# Bilingual fixture: sources with handwritten reference templates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BilingualPair:
    source: str
    reference: str
    reordering: bool


# (source template, reference template, reordering?)
BILINGUAL_TEMPLATES: list[tuple[str, str, bool]] = [
    ("show me the {adj} flights", "montrez moi les vols {adjT}", True),
    ("show me the {adj} flights to {city}", "montrez moi les vols {adjT} a {city}", True),
    ("list the {adj} fares", "listez les tarifs {adjT}", True),
    ("i want a {adj} ticket", "je veux un billet {adjT}", True),
    ("book the {adj} flight to {city}", "reservez les vol {adjT} a {city}", True),
    ("show me the flights to {city}", "montrez moi les vols a {city}", False),
    ("list the fares", "listez les tarifs", False),
    ("what flights leave {city}", "quels vols quittent {city}", False),
    ("the flight to {city} leaves on {day}", "les vol a {city} quitte en {dayT}", False),
    ("which flights have no stops", "quels vols ont aucun arrets", False),
    ("give me the fares from {city} to {city2}", "donnez moi les tarifs de {city} a {city2}", False),
    ("do the flights stop in {city}", "est ce que les vols sarretent dans {city}", False),
    ("what is the fare", "quel est les tarif", False),
    ("i need a ticket to {city}", "je necessite un billet a {city}", False),
    ("the flights arrive in the {daypart}", "les vols arrivent dans les {daypartT}", False),
    ("show me the flights that have no stops", "montrez moi les vols qui ont aucun arrets", False),
]


def bilingual_corpus(n: int = 50, seed: int = 7) -> list[BilingualPair]:
    """n source/reference pairs; at least a fifth exercise reordering."""
    rng = random.Random(seed)
    out = []
    for i in range(n):
        src_t, ref_t, reorder = BILINGUAL_TEMPLATES[i % len(BILINGUAL_TEMPLATES)]
        city = rng.choice(CITIES)
        city2 = rng.choice([c for c in CITIES if c != city])
        adj = rng.choice(ADJS)
        day = rng.choice(DAYS)
        daypart = rng.choice(DAYPARTS)
        fill = dict(city=city, city2=city2, adj=adj, day=day, daypart=daypart,
                    adjT=ADJ_T[adj], daypartT=DAYPART_T[daypart], dayT=DAY_T[day])
        out.append(BilingualPair(src_t.format(**fill), ref_t.format(**fill), reorder))
    return out


# ---------------------------------------------------------------------------
# Raw utterance corpus for the subcorpus recipe (multi-clause, punctuation)
# ---------------------------------------------------------------------------

def corpus_utterances(n: int = 500, seed: int = 11) -> list[str]:
    rng = random.Random(seed)
    out = []
    for i in range(n):
        roll = rng.random()
        first = _fill(rng.choices(PARSE_TEMPLATES,
                                  weights=[w for w, _ in PARSE_TEMPLATES], k=1)[0][1], rng)
        if roll < 0.12:
            second = _fill(rng.choices(PARSE_TEMPLATES,
                                       weights=[w for w, _ in PARSE_TEMPLATES], k=1)[0][1], rng)
            out.append(f"{first} and {second}")
        elif roll < 0.18:
            second = _fill("list the fares", rng)
            out.append(f"{first}. {second}")
        elif roll < 0.21:
            out.append(f"{first} okay")   # trailing out-of-lexicon word
        else:
            out.append(first)
    return out


# ---------------------------------------------------------------------------
# Narrative incidence fixture: 154 analyses x 318 discriminants, resolved
# down to 2 analyses by exactly two judgments
# ---------------------------------------------------------------------------

NARRATIVE_SENTENCE = ("what is the earliest flight that has no stops "
                      "from washington to san francisco on friday")
NARRATIVE_NP_KEY = ("NP:the earliest flight that has no stops from washington "
                    "to san francisco on friday")
NARRATIVE_REL_KEY = "RelC:that has no stops"


def narrative_incidence(analyses: int = 154, discriminants: int = 318,
                        seed: int = 13) -> IncidenceMatrix:
    """A synthetic matrix realizing the two-click resolution narrative.

    Judging the big-NP discriminant correct leaves 20 analyses; judging the
    relative-clause discriminant correct leaves 2; everything else is then
    decided by propagation, so the session resolves in two user judgments.
    """
    rng = random.Random(seed)
    all_ix = list(range(analyses))
    np_set = frozenset(range(20))            # the 20 survivors of click one
    rel_set = frozenset(range(2))            # the 2 survivors of click two
    fake = [WordLeaf(0, 1, f"analysis-{i}") for i in all_ix]
    rows = [
        MatrixRow(Discriminant("constituent", NARRATIVE_NP_KEY), 12, np_set),
        MatrixRow(Discriminant("constituent", NARRATIVE_REL_KEY), 4,
                  rel_set | frozenset(rng.sample(range(20, analyses), 40))),
    ]
    kinds = ["constituent", "triple", "mood"]
    while len(rows) < discriminants:
        i = len(rows)
        kind = kinds[i % len(kinds)]
        key = f"{kind[:4]}-{i:03d}"
        if rng.random() < 0.5:
            # contains both final survivors plus noise
            extra = rng.sample(range(2, analyses), rng.randint(1, analyses - 3))
            holds = frozenset({0, 1} | set(extra))
            if len(holds) >= analyses:
                continue
        else:
            # disjoint from the final survivors, nonempty
            pool = range(2, analyses)
            holds = frozenset(rng.sample(pool, rng.randint(1, analyses - 3)))
        rows.append(MatrixRow(Discriminant(kind, key), rng.randint(1, 8), holds))
    return IncidenceMatrix(list(fake), rows)
