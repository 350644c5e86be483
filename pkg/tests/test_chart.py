import itertools

import pytest

import slt.fixtures as fx
from slt.chart import (
    Chart, UnknownWordError, full_parse, instantiate, lexical_pass, phrasal_pass,
)
from slt.grammar import load_grammar
from slt.lattice import linear_lattice
from slt.pipeline import ParseConfig, parse_staged


def test_lexical_pass_per_entry(grammar):
    chart = Chart(linear_lattice("flights"))
    lexical_pass(chart, grammar)
    lex = [c for c in chart.constituents if c.level == 1]
    assert len(lex) == 1 and lex[0].symbol == "Noun"


def test_lexical_pass_ambiguous_word(grammar):
    chart = Chart(linear_lattice("stops"))
    lexical_pass(chart, grammar)
    lex = [c for c in chart.constituents if c.level == 1]
    # noun reading plus two verb frames
    assert len(lex) == len(grammar.entries_for("stops")) == 3


def test_lexical_counts_match_lexicon_scan(grammar):
    sentence = "show me the flights to boston please"
    chart = Chart(linear_lattice(sentence))
    lexical_pass(chart, grammar)
    expected = sum(len(grammar.entries_for(w)) for w in sentence.split())
    assert len([c for c in chart.constituents if c.level == 1]) == expected


def test_unknown_word_gets_unk(grammar):
    chart = Chart(linear_lattice("show me the zorkmid"))
    lexical_pass(chart, grammar)
    unk = [c for c in chart.constituents if c.symbol == "UNK"]
    assert len(unk) == 1 and unk[0].words == ("zorkmid",)


def test_unknown_word_disabled_raises(grammar):
    chart = Chart(linear_lattice("zorkmid"))
    with pytest.raises(UnknownWordError):
        lexical_pass(chart, grammar, unknown_words=False)


AGREE = """
categories: S NP Det Noun
tags: DT NN
start: S
rule np: NP[num=N] -> Det[num=N] Noun[num=N] phrasal
rule s: S[] -> NP[] level=2
lex "a": Det[num=sg] tag=DT sem=indef
lex "flights": Noun[num=pl] tag=NN sem=flights
lex "flight": Noun[num=sg] tag=NN sem=flight
"""


def test_phrasal_unification_success_and_failure():
    g = load_grammar(AGREE)
    chart = Chart(linear_lattice("a flight"))
    lexical_pass(chart, g)
    phrasal_pass(chart, g)
    assert len([c for c in chart.constituents if c.symbol == "NP"]) == 1
    chart = Chart(linear_lattice("a flights"))
    lexical_pass(chart, g)
    phrasal_pass(chart, g)
    assert not [c for c in chart.constituents if c.symbol == "NP"]


def _naive_phrasal_closure(chart, grammar):
    """Exhaustive fixpoint oracle, reimplemented from the rule semantics."""
    items = {(c.frm, c.to, c.symbol, c.bindings, c.derivation): c
             for c in chart.constituents if c.level >= 1}
    changed = True
    counter = itertools.count(1)
    while changed:
        changed = False
        for rule in grammar.phrasal_rules:
            current = list(items.values())
            for combo in itertools.product(current, repeat=len(rule.rhs)):
                if any(c.symbol != cat.symbol for c, cat in zip(combo, rule.rhs)):
                    continue
                if any(a.to != b.frm for a, b in zip(combo, combo[1:])):
                    continue
                new = instantiate(rule, combo, f"!o{next(counter)}")
                if new is None:
                    continue
                key = (new.frm, new.to, new.symbol, new.bindings, new.derivation)
                if key not in items:
                    items[key] = new
                    changed = True
    return {k for k in items}


@pytest.mark.parametrize("sentence", [
    "show me the flights to boston",
    "the cheap flights from denver to dallas",
    "what flights leave boston",
    "give me the fares",
])
def test_phrasal_closure_equals_naive_oracle(grammar, sentence):
    chart = Chart(linear_lattice(sentence))
    lexical_pass(chart, grammar)
    expected = _naive_phrasal_closure(chart, grammar)
    phrasal_pass(chart, grammar)
    got = {(c.frm, c.to, c.symbol, c.bindings, c.derivation)
           for c in chart.constituents if c.level >= 1}
    assert got == expected


def test_full_parse_single_rule():
    g = load_grammar("""
categories: S NP VP Noun Verb
tags: NN VB
start: S
rule np: NP[] -> Noun[] phrasal
rule vp: VP[] -> Verb[] level=2
rule s: S[] -> NP[] VP[] level=2
lex "flights": Noun[] tag=NN sem=flights
lex "leave": Verb[] tag=VB sem=leave
""")
    chart = Chart(linear_lattice("flights leave"))
    lexical_pass(chart, g)
    phrasal_pass(chart, g)
    full_parse(chart, g)
    assert len(chart.full_span_analyses("S")) == 1


def test_attachment_ambiguity(grammar):
    chart = fx.parse_sentence("show me the flights to boston", grammar)
    assert len(chart.full_span_analyses("S")) == 2


def test_no_duplicate_constituents(grammar):
    chart = fx.parse_sentence("show me the flights to boston", grammar)
    keys = [c.key() for c in chart.constituents]
    assert len(keys) == len(set(keys))


def test_levels_consistent_with_rules(grammar):
    chart = fx.parse_sentence("show me the flights", grammar)
    for c in chart.constituents:
        if c.level >= 2:
            rule = grammar.rule_by_id[c.derivation.rule_id]
            assert c.level == rule.level + 1


def test_stages_monotone_without_pruning(grammar):
    lattice = linear_lattice("show me the flights to boston")
    outputs = parse_staged(lattice, grammar)
    counts = [s.constituents for s in outputs.stages]
    assert counts == sorted(counts)
    assert [s.stage for s in outputs.stages] == ["raw", "lexical", "phrasal", "full"]


def test_staged_full_sentence_single_fragment(grammar):
    outputs = parse_staged(linear_lattice("show me the flights to boston"), grammar)
    full = outputs.stage("full")
    assert len(full.best.fragments) == 1
    assert full.best.fragments[0].symbol == "S"


def test_staged_out_of_grammar_word_fragments(grammar):
    outputs = parse_staged(linear_lattice("show me the zorkmid flights"), grammar)
    raw = outputs.stage("raw")
    assert raw.best.words() == ("show", "me", "the", "zorkmid", "flights")
    full = outputs.stage("full")
    assert len(full.best.fragments) >= 2


def test_empty_specialized_adds_nothing(grammar, treebank300):
    from slt.ebl import SpecializedGrammar
    empty = SpecializedGrammar(grammar, [])
    outputs = parse_staged(linear_lattice("show me the flights"), grammar, empty)
    phrasal = outputs.stage("phrasal")
    full = outputs.stage("full")
    assert full.constituents == phrasal.constituents


def test_chart_json_dump(grammar):
    import json
    chart = fx.parse_sentence("show me flights", grammar)
    dump = json.loads(chart.to_json())
    assert isinstance(dump, list)
    full = [d for d in dump if d["category"] == "S"]
    assert full and full[0]["rule"] == "s_imp"
    assert {"from", "to", "words", "level", "acoustic", "linguistic"} <= set(dump[0])
