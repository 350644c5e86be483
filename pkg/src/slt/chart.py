"""Bottom-up chart parsing over word lattices, staged and pruning-aware.

Constituent levels: 0 = raw word edge, 1 = lexical/tag analysis,
2 = phrasal, >= 3 = the successive full-parse levels.  A constituent
created by a rule sits one level above the rule's declared level.

Passes only ever add constituents; deletion is the pruner's job, injected
into :func:`full_parse` as a hook so the two modules stay decoupled.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

from .grammar import (
    EMPTY, Category, FeatureTerm, Grammar, LexEntry, Rule, Var, unify_into, walk,
)
from .lattice import Lattice

WORD_SYMBOL = "_WORD"
UNK_SYMBOL = "UNK"


class ParseError(Exception):
    pass


class UnknownWordError(ParseError):
    def __init__(self, word: str):
        self.word = word
        super().__init__(f"no lexical entry for {word!r} and unknown-word handling is disabled")


# ---------------------------------------------------------------------------
# Derivations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WordLeaf:
    frm: int
    to: int
    word: str


@dataclass(frozen=True)
class LexLeaf:
    frm: int
    to: int
    word: str
    tag: str
    symbol: str
    sem: str


@dataclass(frozen=True)
class RuleNode:
    rule_id: str
    symbol: str
    frm: int
    to: int
    children: tuple["Derivation", ...]


Derivation = Union[WordLeaf, LexLeaf, RuleNode]


def derivation_words(d: Derivation) -> tuple[str, ...]:
    if isinstance(d, (WordLeaf, LexLeaf)):
        return (d.word,)
    return tuple(w for c in d.children for w in derivation_words(c))


def subtrees(d: Derivation) -> Iterable[Derivation]:
    yield d
    if isinstance(d, RuleNode):
        for c in d.children:
            yield from subtrees(c)


def derivation_to_json(d: Derivation) -> dict:
    if isinstance(d, WordLeaf):
        return {"word": d.word, "from": d.frm, "to": d.to}
    if isinstance(d, LexLeaf):
        return {"word": d.word, "from": d.frm, "to": d.to,
                "tag": d.tag, "cat": d.symbol, "sem": d.sem}
    return {"rule": d.rule_id, "cat": d.symbol, "from": d.frm, "to": d.to,
            "children": [derivation_to_json(c) for c in d.children]}


def derivation_from_json(obj: dict) -> Derivation:
    if "rule" in obj:
        return RuleNode(obj["rule"], obj["cat"], obj["from"], obj["to"],
                        tuple(derivation_from_json(c) for c in obj["children"]))
    if "tag" in obj:
        return LexLeaf(obj["from"], obj["to"], obj["word"], obj["tag"],
                       obj["cat"], obj["sem"])
    return WordLeaf(obj["from"], obj["to"], obj["word"])


# ---------------------------------------------------------------------------
# Constituents and the chart
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Constituent:
    frm: int
    to: int
    symbol: str
    bindings: FeatureTerm
    derivation: Derivation
    level: int
    acoustic: float = 0.0
    linguistic: float = 0.0

    @property
    def category(self) -> Category:
        return Category(self.symbol, self.bindings)

    @property
    def words(self) -> tuple[str, ...]:
        return derivation_words(self.derivation)

    @property
    def tag(self) -> str:
        """The tag a neighbouring constituent sees: POS tag at the lexical
        level, the category symbol above it."""
        d = self.derivation
        if isinstance(d, LexLeaf):
            return d.tag
        if isinstance(d, WordLeaf):
            return WORD_SYMBOL
        return self.symbol

    def key(self):
        return (self.frm, self.to, self.symbol, self.bindings, self.derivation)

    def to_json(self) -> dict:
        out = {"from": self.frm, "to": self.to, "category": self.symbol,
               "words": list(self.words), "level": self.level,
               "acoustic": self.acoustic, "linguistic": self.linguistic}
        if isinstance(self.derivation, RuleNode):
            out["rule"] = self.derivation.rule_id
        return out


STAGES = ("raw", "lexical", "phrasal", "full")


class Chart:
    """Vertex-indexed constituent store confined to one parse activity."""

    def __init__(self, lattice: Lattice):
        self.lattice = lattice
        self.vertex_count = lattice.vertex_count
        self.stage = "raw"
        self._order: list[Constituent] = []
        self._index: dict[tuple, int] = {}
        self._by_from: dict[int, list[Constituent]] = {}
        self._by_to: dict[int, list[Constituent]] = {}
        self._var_counter = itertools.count(1)
        for e in sorted(lattice.edges, key=lambda e: (e.frm, e.to, e.word)):
            self.add(Constituent(e.frm, e.to, WORD_SYMBOL, EMPTY,
                                 WordLeaf(e.frm, e.to, e.word), 0, e.acoustic, 0.0))

    def fresh_suffix(self) -> str:
        return f"#{next(self._var_counter)}"

    def add(self, c: Constituent) -> bool:
        k = c.key()
        if k in self._index:
            return False
        self._index[k] = len(self._order)
        self._order.append(c)
        self._by_from.setdefault(c.frm, []).append(c)
        self._by_to.setdefault(c.to, []).append(c)
        return True

    def remove(self, doomed: Iterable[Constituent]):
        gone = {c.key() for c in doomed}
        if not gone:
            return
        self._order = [c for c in self._order if c.key() not in gone]
        self._index = {c.key(): i for i, c in enumerate(self._order)}
        self._by_from = {}
        self._by_to = {}
        for c in self._order:
            self._by_from.setdefault(c.frm, []).append(c)
            self._by_to.setdefault(c.to, []).append(c)

    @property
    def constituents(self) -> list[Constituent]:
        return list(self._order)

    def starting_at(self, v: int) -> list[Constituent]:
        return list(self._by_from.get(v, []))

    def ending_at(self, v: int) -> list[Constituent]:
        return list(self._by_to.get(v, []))

    def index_of(self, c: Constituent) -> int:
        return self._index[c.key()]

    def spanning(self, frm: int, to: int, symbol: Optional[str] = None) -> list[Constituent]:
        return [c for c in self._by_from.get(frm, [])
                if c.to == to and (symbol is None or c.symbol == symbol)]

    def full_span_analyses(self, symbol: str) -> list[Constituent]:
        return self.spanning(0, self.vertex_count - 1, symbol)

    def is_connected(self, excluding: frozenset = frozenset()) -> bool:
        reachable = {0}
        frontier = deque([0])
        end = self.vertex_count - 1
        while frontier:
            v = frontier.popleft()
            for c in self._by_from.get(v, []):
                if c.key() in excluding:
                    continue
                if c.to == end:
                    return True
                if c.to not in reachable:
                    reachable.add(c.to)
                    frontier.append(c.to)
        return end == 0

    def decoder_edges(self) -> list[Constituent]:
        return list(self._order)

    def to_json(self) -> str:
        return json.dumps([c.to_json() for c in self._order], indent=None)


# ---------------------------------------------------------------------------
# Scoring hook (the pruner's statistics feed the linguistic score)
# ---------------------------------------------------------------------------

# Maps a constituent to the log success ratio of its own discriminant;
# None means "no model", contributing 0.
ScoreFn = Optional[Callable[[Constituent], float]]


def _mk_constituent(rule: Rule, children: Sequence[Constituent],
                    bindings: FeatureTerm, score_fn: ScoreFn) -> Constituent:
    deriv = RuleNode(rule.id, rule.lhs.symbol, children[0].frm, children[-1].to,
                     tuple(c.derivation for c in children))
    acoustic = sum(c.acoustic for c in children)
    linguistic = sum(c.linguistic for c in children)
    c = Constituent(children[0].frm, children[-1].to, rule.lhs.symbol,
                    canonicalize_term(bindings), deriv, rule.level + 1,
                    acoustic, linguistic)
    if score_fn is not None:
        c = Constituent(c.frm, c.to, c.symbol, c.bindings, c.derivation, c.level,
                        c.acoustic, linguistic + score_fn(c))
    return c


def canonicalize_term(ft: FeatureTerm) -> FeatureTerm:
    """Rename variables positionally so structurally equal terms compare equal."""
    mapping: dict[Var, Var] = {}
    out = {}
    for k, v in ft.pairs:
        if isinstance(v, Var):
            if v not in mapping:
                mapping[v] = Var(f"_{len(mapping)}")
            v = mapping[v]
        out[k] = v
    return FeatureTerm.of(out)


def instantiate(rule: Rule, children: Sequence[Constituent], suffix: str,
                score_fn: ScoreFn = None) -> Optional[Constituent]:
    """Apply a rule to adjacent children; None if unification fails."""
    subst: dict = {}
    for i, (slot, child) in enumerate(zip(rule.rhs, children)):
        # children are renamed apart from the rule and from each other
        if not unify_into(slot.features.rename(suffix),
                          child.bindings.rename(f"{suffix}c{i}"), subst):
            return None
    lhs = rule.lhs.features.rename(suffix)
    bindings = lhs.substitute(subst)
    return _mk_constituent(rule, children, bindings, score_fn)


# ---------------------------------------------------------------------------
# Passes
# ---------------------------------------------------------------------------

def lexical_pass(chart: Chart, grammar: Grammar, unknown_words: bool = True,
                 unk_tag: str = "UNK", score_fn: ScoreFn = None) -> Chart:
    """One level-1 constituent per (word edge, matching lexicon entry)."""
    for word_c in [c for c in chart.constituents if c.level == 0]:
        word = word_c.words[0]
        entries = grammar.entries_for(word)
        if not entries:
            if not unknown_words:
                raise UnknownWordError(word)
            entries = [LexEntry(word, Category(UNK_SYMBOL), unk_tag, word)]
        for e in entries:
            deriv = LexLeaf(word_c.frm, word_c.to, word, e.tag, e.category.symbol, e.sem)
            c = Constituent(word_c.frm, word_c.to, e.category.symbol,
                            canonicalize_term(e.category.features.rename(chart.fresh_suffix())),
                            deriv, 1, word_c.acoustic, 0.0)
            if score_fn is not None:
                c = Constituent(c.frm, c.to, c.symbol, c.bindings, c.derivation,
                                c.level, c.acoustic, score_fn(c))
            chart.add(c)
    chart.stage = "lexical"
    return chart


def _closure(chart: Chart, rules: Sequence[Rule], score_fn: ScoreFn,
             max_constituents: int) -> None:
    """Exhaustively apply rules over level >= 1 constituents, deterministically."""
    by_symbol: dict[str, list[tuple[Rule, int]]] = {}
    for r in rules:
        for i, cat in enumerate(r.rhs):
            by_symbol.setdefault(cat.symbol, []).append((r, i))

    def eligible(c: Constituent) -> bool:
        return c.level >= 1

    agenda = deque(sorted((c for c in chart.constituents if eligible(c)),
                          key=lambda c: (c.to, c.frm, c.level, chart.index_of(c))))
    while agenda:
        c = agenda.popleft()
        for rule, slot in by_symbol.get(c.symbol, []):
            for children in _combinations(chart, rule, slot, c, eligible):
                new = instantiate(rule, children, chart.fresh_suffix(), score_fn)
                if new is not None and chart.add(new):
                    agenda.append(new)
                    if len(chart.constituents) > max_constituents:
                        raise ParseError("constituent cap exceeded; grammar may cycle")


def _combinations(chart: Chart, rule: Rule, slot: int, anchor: Constituent,
                  eligible) -> Iterable[tuple[Constituent, ...]]:
    """All adjacent child tuples for rule with anchor at the given slot."""
    lefts: list[tuple[Constituent, ...]] = [()]
    for i in range(slot - 1, -1, -1):
        symbol = rule.rhs[i].symbol
        nxt = []
        for seq in lefts:
            at = seq[0].frm if seq else anchor.frm
            for c in chart.ending_at(at):
                if c.symbol == symbol and eligible(c):
                    nxt.append((c,) + seq)
        lefts = nxt
        if not lefts:
            return
    rights: list[tuple[Constituent, ...]] = [()]
    for i in range(slot + 1, len(rule.rhs)):
        symbol = rule.rhs[i].symbol
        nxt = []
        for seq in rights:
            at = seq[-1].to if seq else anchor.to
            for c in chart.starting_at(at):
                if c.symbol == symbol and eligible(c):
                    nxt.append(seq + (c,))
        rights = nxt
        if not rights:
            return
    for left in lefts:
        for right in rights:
            yield left + (anchor,) + right


def phrasal_pass(chart: Chart, grammar: Grammar, score_fn: ScoreFn = None,
                 max_constituents: int = 200000) -> Chart:
    if chart.stage not in ("lexical", "phrasal"):
        raise ParseError("phrasal pass requires a completed lexical pass")
    _closure(chart, grammar.phrasal_rules, score_fn, max_constituents)
    chart.stage = "phrasal"
    return chart


PruneHook = Optional[Callable[[Chart, int], None]]


def full_parse(chart: Chart, grammar, prune_plan: frozenset[int] = frozenset(),
               score_fn: ScoreFn = None, prune_hook: PruneHook = None,
               max_constituents: int = 200000) -> Chart:
    """Apply non-phrasal rule levels in ascending order.

    ``grammar`` is anything with a ``parse_rules`` list (a specialized
    grammar) or a plain Grammar, whose non-phrasal rules are used.  After
    finishing each level listed in prune_plan, prune_hook runs.
    """
    if chart.stage not in ("phrasal", "full"):
        raise ParseError("full parse requires a completed phrasal pass")
    rules = getattr(grammar, "parse_rules", None)
    if rules is None:
        rules = list(grammar.rules)
    phrasal = [r for r in rules if r.is_phrasal]
    leveled = [r for r in rules if not r.is_phrasal]
    levels = sorted({r.level for r in leveled})
    for level in levels:
        # cumulative closure: phrasal and lower-level rules may fire over
        # this level's output (e.g. a PP over a newly attached NP)
        active = phrasal + [r for r in leveled if r.level <= level]
        _closure(chart, active, score_fn, max_constituents)
        if prune_hook is not None and level in prune_plan:
            prune_hook(chart, level)
    chart.stage = "full"
    return chart
