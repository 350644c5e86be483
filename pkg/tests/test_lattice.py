import random

import pytest
from hypothesis import given, settings, strategies as st

from slt.lattice import (
    Lattice, LatticeError, conflate_nbest, linear_lattice, load_nbest,
)


def test_linear_lattice_counts():
    l = linear_lattice("show me flights")
    assert l.vertex_count == 4 and len(l.edges) == 3
    assert [e.word for e in l.edges] == ["show", "me", "flights"]


def test_linear_single_word():
    l = linear_lattice("x")
    assert l.vertex_count == 2 and len(l.edges) == 1


def test_linear_empty_rejected():
    with pytest.raises(LatticeError):
        linear_lattice("   ")


def test_linear_long_sentence():
    words = " ".join(f"w{i}" for i in range(12))
    l = linear_lattice(words)
    assert l.vertex_count == 13 and len(l.edges) == 12


def test_default_score_applied():
    l = linear_lattice("a b", default_score=-1.5)
    assert all(e.acoustic == -1.5 for e in l.edges)


def test_json_round_trip():
    l = linear_lattice("a b c", -0.25)
    assert Lattice.from_json(l.to_json()) == l


def test_load_nbest():
    hyps = load_nbest("-12.5\tshow me flights\n-13.0\tshow we flights\n")
    assert hyps == [("show me flights", -12.5), ("show we flights", -13.0)]


def test_forward_edges_enforced():
    with pytest.raises(LatticeError):
        Lattice(3, (type(linear_lattice("a").edges[0])(2, 1, "x", 0.0),))


# --- conflation ------------------------------------------------------------

def test_single_hypothesis_equals_linear():
    l = conflate_nbest([("show me flights", -6.0)])
    lin = linear_lattice("show me flights", -2.0)
    assert l.path_words() == lin.path_words()
    assert all(e.acoustic == -2.0 for e in l.edges)


def test_optional_word_becomes_branch():
    l = conflate_nbest([("show me flights", -3.0), ("show me the flights", -4.0)])
    words = l.path_words()
    assert ("show", "me", "flights") in words
    assert ("show", "me", "the", "flights") in words


def test_five_hypotheses_all_recoverable():
    hyps = [
        ("show me flights to boston", -10.0),
        ("show me the flights to boston", -11.0),
        ("show me flights to austin", -12.0),
        ("show flights to boston", -13.0),
        ("show me my flights to boston", -14.0),
    ]
    l = conflate_nbest(hyps, n_max=5)
    words = l.path_words()
    for sentence, _ in hyps:
        assert tuple(sentence.split()) in words
    assert len(words) >= 5


def test_too_many_hypotheses():
    hyps = [(f"w{i}", -1.0) for i in range(6)]
    with pytest.raises(LatticeError):
        conflate_nbest(hyps, n_max=5)


def test_empty_hypothesis_list():
    with pytest.raises(LatticeError):
        conflate_nbest([])


def test_score_is_max_of_shares():
    l = conflate_nbest([("a b", -4.0), ("a c", -2.0)])
    a_edges = [e for e in l.edges if e.word == "a"]
    assert a_edges and max(e.acoustic for e in a_edges) == -1.0


words_st = st.lists(st.sampled_from(["a", "b", "c", "d"]), min_size=1, max_size=5)


@settings(max_examples=60, deadline=None)
@given(st.lists(words_st, min_size=1, max_size=5), st.randoms())
def test_conflation_soundness(hyp_words, rnd):
    hyps = [(" ".join(ws), -float(len(ws))) for ws in hyp_words]
    l = conflate_nbest(hyps, n_max=5)
    paths = l.path_words()
    for sentence, _ in hyps:
        assert tuple(sentence.split()) in paths
    # topological validity is enforced by the Lattice constructor
    assert all(e.frm < e.to for e in l.edges)
