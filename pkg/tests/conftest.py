import random

import pytest

import slt.fixtures as fx
from slt import ebl
from slt.chart import Chart, Constituent, RuleNode, WordLeaf
from slt.decoder import Graph, GraphEdge
from slt.grammar import EMPTY
from slt.lattice import linear_lattice
from slt.lr import compile_lr


@pytest.fixture(scope="session")
def grammar():
    return fx.fixture_grammar()


@pytest.fixture(scope="session")
def treebank300(grammar):
    return fx.training_treebank(300, seed=3, grammar=grammar)


@pytest.fixture(scope="session")
def specialized(grammar, treebank300):
    return ebl.specialize(treebank300, grammar, ebl.CutCriteria(frozenset({"NP"})))


@pytest.fixture(scope="session")
def lr_table(specialized):
    return compile_lr(specialized)


@pytest.fixture(scope="session")
def bilingual():
    return fx.fixture_bilingual()


@pytest.fixture(scope="session")
def preferences():
    return fx.fixture_preferences()


def random_graph(rng: random.Random, max_vertices: int = 12, max_edges: int = 40) -> Graph:
    """Random decodable DAG with a guaranteed start-to-end path."""
    n = rng.randint(2, max_vertices)
    edges = [GraphEdge(i, i + 1, rng.uniform(-5.0, 0.0), rng.uniform(-1.0, 1.0),
                       rng.randint(0, 2)) for i in range(n - 1)]
    for _ in range(rng.randint(0, max(0, max_edges - len(edges)))):
        a = rng.randrange(0, n - 1)
        b = rng.randrange(a + 1, n)
        edges.append(GraphEdge(a, b, rng.uniform(-5.0, 0.0), rng.uniform(-1.0, 1.0),
                               rng.randint(0, 4)))
    return Graph(n, edges)


WORDS = ["show", "me", "the", "flights", "to", "boston", "fares", "on"]
SYMBOLS = ["NP", "VP", "PP", "S"]


def random_chart(rng: random.Random, max_words: int = 7,
                 max_extra: int = 12) -> Chart:
    """A chart over a linear lattice with synthetic higher constituents."""
    n = rng.randint(2, max_words)
    words = [rng.choice(WORDS) for _ in range(n)]
    chart = Chart(linear_lattice(" ".join(words)))
    for _ in range(rng.randint(0, max_extra)):
        frm = rng.randrange(0, n)
        to = rng.randrange(frm + 1, n + 1)
        symbol = rng.choice(SYMBOLS)
        leaves = tuple(WordLeaf(i, i + 1, words[i]) for i in range(frm, to))
        deriv = RuleNode(f"r{rng.randrange(6)}", symbol, frm, to, leaves)
        chart.add(Constituent(frm, to, symbol, EMPTY, deriv,
                              rng.randint(1, 4), rng.uniform(-3.0, 0.0), 0.0))
    return chart


def all_paths(vertex_count: int, edges):
    """Exhaustive start-to-end path enumeration (test oracle)."""
    by_from = {}
    for i, e in enumerate(edges):
        by_from.setdefault(e.frm, []).append((i, e))
    out = []
    stack = [(0, ())]
    while stack:
        v, path = stack.pop()
        if v == vertex_count - 1:
            out.append(path)
            continue
        for i, e in by_from.get(v, []):
            stack.append((e.to, path + ((i, e),)))
    return out
