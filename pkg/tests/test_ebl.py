import pytest

import slt.fixtures as fx
from slt.chart import RuleNode
from slt.ebl import (
    CutCriteria, EBLError, chunk_derivation, expand, load_specialized,
    rewrite_derivation, specialize, specialized_to_text, validate_expansion,
)
from slt.grammar import load_grammar
from slt.treebanker import TreebankEntry

TWO_RULE = """
categories: S NP VP Noun Verb
tags: NN VB
start: S
rule np: NP[] -> Noun[] phrasal
rule vp: VP[] -> Verb[] NP[] level=2
rule s: S[] -> NP[] VP[] level=3
lex "pilots": Noun[] tag=NN sem=pilots
lex "flights": Noun[] tag=NN sem=flights
lex "book": Verb[] tag=VB sem=book
"""


def _derivation(g, sentence="pilots book flights"):
    return fx.canonical_analyses(sentence, g)[0].derivation


def test_chunk_collapses_vp_under_s():
    g = load_grammar(TWO_RULE)
    d = _derivation(g)
    macros = chunk_derivation(d, g, CutCriteria(frozenset({"NP"})))
    assert len(macros) == 1
    m = macros[0]
    assert m.lhs.symbol == "S"
    assert [c.symbol for c in m.rhs] == ["NP", "Verb", "NP"]
    assert m.body.rule_id == "s"


def test_cut_everywhere_is_identity_specialization():
    g = load_grammar(TWO_RULE)
    d = _derivation(g)
    macros = chunk_derivation(d, g, CutCriteria(frozenset({"S", "NP", "VP"})))
    bodies = {m.body.rule_id: m for m in macros}
    assert set(bodies) == {"s", "vp"}
    for m in macros:
        rule = g.rule_by_id[m.body.rule_id]
        assert [c.symbol for c in m.rhs] == [c.symbol for c in rule.rhs]
        assert all(child is None for child in m.body.children)


def test_single_rule_derivation_single_macro():
    g = load_grammar(TWO_RULE)
    d = _derivation(g)
    inner_vp = d.children[1]
    macros = chunk_derivation(inner_vp, g, CutCriteria(frozenset({"NP"})))
    assert len(macros) == 1 and macros[0].body.rule_id == "vp"


def test_chunk_unknown_rule_rejected():
    g = load_grammar(TWO_RULE)
    d = _derivation(g)
    broken = RuleNode("ghost", d.symbol, d.frm, d.to, d.children)
    with pytest.raises(EBLError):
        chunk_derivation(broken, g, CutCriteria(frozenset({"NP"})))


def test_specialize_merges_frequencies():
    g = load_grammar(TWO_RULE)
    d = _derivation(g)
    entries = [TreebankEntry("a", ("pilots", "book", "flights"), (d,)),
               TreebankEntry("b", ("pilots", "book", "flights"), (d,))]
    sg = specialize(entries, g, CutCriteria(frozenset({"NP"})))
    assert len(sg.macros) == 1 and sg.macros[0].frequency == 2


def test_expand_reconstructs(grammar, treebank300):
    crit = CutCriteria(frozenset({"NP"}))
    sg = specialize(treebank300, grammar, crit)
    for entry in treebank300[:50]:
        for d in entry.approved:
            rewritten = rewrite_derivation(d, grammar, crit)
            assert expand(rewritten, sg) == d


def test_phrasal_only_expansion_unchanged(grammar, specialized):
    chart = fx.parse_sentence("show me the flights", grammar)
    np = next(c for c in chart.constituents
              if c.symbol == "NP" and c.words == ("the", "flights"))
    assert expand(np.derivation, specialized) == np.derivation


def test_training_set_closure(grammar, treebank300, specialized, lr_table):
    # every training sentence's approved analysis is derivable under the
    # specialized grammar
    from slt.lr import glr_parse, lexical_alternatives
    for entry in treebank300[:40]:
        analyses = glr_parse(lexical_alternatives(list(entry.words), grammar),
                             lr_table, specialized)
        expanded = {expand(c.derivation, specialized) for c in analyses}
        for d in entry.approved:
            assert d in expanded


def test_subset_coverage(grammar, specialized, lr_table):
    # expanded specialized analyses are a subset of original-grammar analyses
    from slt.lr import glr_parse, lexical_alternatives
    for sentence in fx.held_out_sentences(30, seed=23):
        original = {c.derivation for c in
                    fx.parse_sentence(sentence, grammar).full_span_analyses("S")}
        spec = glr_parse(lexical_alternatives(sentence.split(), grammar),
                         lr_table, specialized)
        expanded = {expand(c.derivation, specialized) for c in spec}
        assert expanded <= original


def test_expansion_validates(grammar, specialized, lr_table):
    from slt.lr import glr_parse, lexical_alternatives
    for sentence in fx.held_out_sentences(20, seed=29):
        for c in glr_parse(lexical_alternatives(sentence.split(), grammar),
                           lr_table, specialized):
            assert validate_expansion(expand(c.derivation, specialized), grammar)


def test_specialized_file_round_trip(specialized):
    text = specialized_to_text(specialized)
    sg2 = load_specialized(text)
    assert specialized_to_text(sg2) == text
    assert [m.id for m in sg2.macros] == [m.id for m in specialized.macros]
    assert [m.frequency for m in sg2.macros] == [m.frequency for m in specialized.macros]


def test_min_frequency_threshold(grammar, treebank300):
    crit_all = CutCriteria(frozenset({"NP"}), min_frequency=1)
    crit_common = CutCriteria(frozenset({"NP"}), min_frequency=5)
    sg_all = specialize(treebank300, grammar, crit_all)
    sg_common = specialize(treebank300, grammar, crit_common)
    assert len(sg_common.macros) < len(sg_all.macros)
    assert all(m.frequency >= 5 for m in sg_common.macros)


def test_deterministic_macro_order(grammar, treebank300):
    crit = CutCriteria(frozenset({"NP"}))
    a = specialize(treebank300, grammar, crit)
    b = specialize(list(treebank300), grammar, crit)
    assert [m.id for m in a.macros] == [m.id for m in b.macros]
    freqs = [m.frequency for m in a.macros]
    assert freqs == sorted(freqs, reverse=True)


def test_empty_treebank_rejected(grammar):
    with pytest.raises(EBLError):
        specialize([], grammar, CutCriteria(frozenset({"NP"})))
