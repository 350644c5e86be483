import pytest
from hypothesis import given, strategies as st

from slt.grammar import (
    EMPTY, FeatureTerm, GrammarError, Var, load_grammar, parse_pred_tree,
    serialize_grammar, unify,
)

MINI = """
categories: S NP Det Noun
tags: DT NN
start: S
rule r1: NP[num=N] -> Det[num=N] Noun[num=N] phrasal
rule s1: S[] -> NP[] level=2
lex "the": Det[] tag=DT sem=def
lex "flight": Noun[num=sg] tag=NN sem=flight
"""


def test_single_rule_document():
    g = load_grammar(MINI)
    assert len(g.phrasal_rules) == 1
    r = g.rules[0]
    assert r.lhs.symbol == "NP" and len(r.rhs) == 2 and r.level == 1


def test_undeclared_category_reports_line():
    doc = MINI + "rule bad: XP[] -> Det[] level=2\n"
    with pytest.raises(GrammarError, match=r"undeclared category XP at line \d+"):
        load_grammar(doc)


def test_duplicate_rule_id():
    doc = MINI + "rule r1: S[] -> NP[] level=2\n"
    with pytest.raises(GrammarError, match="duplicate rule id r1"):
        load_grammar(doc)


def test_syntax_error_has_location():
    with pytest.raises(GrammarError, match="line 2"):
        load_grammar("categories: S\nrule nonsense\nstart: S\n")


def test_undeclared_tag():
    doc = MINI + 'lex "x": Noun[] tag=ZZ sem=x\n'
    with pytest.raises(GrammarError, match="undeclared tag ZZ"):
        load_grammar(doc)


def test_fixture_grammar_loads(grammar):
    assert len(grammar.rules) >= 25
    assert len(grammar.lexicon) >= 60
    assert grammar.start.symbol == "S"


def test_serialize_round_trip(grammar):
    text = serialize_grammar(grammar)
    g2 = load_grammar(text)
    assert serialize_grammar(g2) == text
    assert g2.fingerprint() == grammar.fingerprint()
    assert len(g2.rules) == len(grammar.rules)
    assert len(g2.transfer_rules) == len(grammar.transfer_rules)


# --- unification -----------------------------------------------------------

def test_unify_identity():
    a = FeatureTerm.of({"num": "sg"})
    assert unify(a, a) == a


def test_unify_atom_clash():
    assert unify(FeatureTerm.of({"num": "sg"}), FeatureTerm.of({"num": "pl"})) is None


def test_unify_variable_binding():
    a = FeatureTerm.of({"num": Var("N")})
    b = FeatureTerm.of({"num": "pl", "case": "obj"})
    assert unify(a, b) == FeatureTerm.of({"num": "pl", "case": "obj"})


def test_unify_empty_is_identity():
    a = FeatureTerm.of({"num": "sg", "case": Var("C")})
    assert unify(a, EMPTY) == a
    assert unify(EMPTY, a) == a


atoms = st.sampled_from(["sg", "pl", "obj", "a", "b"])
values = st.one_of(atoms, st.sampled_from([Var("X"), Var("Y"), Var("Z")]))
terms = st.dictionaries(st.sampled_from(["num", "case", "per", "def"]), values,
                        max_size=4).map(FeatureTerm.of)


def _canon(ft):
    mapping = {}
    out = {}
    for k, v in ft.pairs:
        if isinstance(v, Var):
            v = mapping.setdefault(v, Var(f"c{len(mapping)}"))
        out[k] = v
    return FeatureTerm.of(out)


@given(terms, terms)
def test_unify_commutative_up_to_renaming(a, b):
    ab, ba = unify(a, b), unify(b, a)
    assert (ab is None) == (ba is None)
    if ab is not None:
        assert _canon(ab) == _canon(ba)


@given(terms)
def test_unify_with_empty(a):
    assert unify(a, EMPTY) == a


# --- predicate patterns ----------------------------------------------------

def test_parse_pred_tree():
    t = parse_pred_tree("show(X, f(def, \"quel est\"))")
    assert t.functor == "show" and len(t.args) == 2
    assert t.args[0].functor == Var("X")
    assert t.args[1].args[1].functor == "quel est"


def test_pred_tree_trailing_junk():
    with pytest.raises(GrammarError):
        parse_pred_tree("show(X))")
