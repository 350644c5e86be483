"""Grammar specialization: chunk treebanked derivations into macro-rules.

Cutting a derivation at every node whose category is in the cut set (and
at the root) partitions its non-phrasal part into chunks; each chunk
becomes one macro-rule whose feature constraints are the composition of
the original rules' constraints, so the macro applies in a single
unification step.  Phrasal rules pass through unchanged, which keeps any
specialized-grammar analysis expandable into a valid original-grammar
derivation.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Optional, Union

from .chart import Derivation, LexLeaf, RuleNode, WordLeaf
from .grammar import (
    NON_PHRASAL, Category, FeatureTerm, Grammar, GrammarError, Rule, Var,
    load_grammar, serialize_grammar, unify_into,
)

if TYPE_CHECKING:  # pragma: no cover
    from .treebanker import TreebankEntry


class EBLError(Exception):
    pass


@dataclass(frozen=True)
class CutCriteria:
    cut_categories: frozenset[str]
    include_lexical_frontier: bool = True
    min_frequency: int = 1

    def __post_init__(self):
        if not self.cut_categories:
            raise ValueError("cut set must be nonempty")


@dataclass(frozen=True)
class BodyNode:
    """Template tree of original rule ids; None children are frontier slots."""
    rule_id: str
    children: tuple[Optional["BodyNode"], ...]

    def to_sexpr(self) -> str:
        inner = " ".join("*" if c is None else c.to_sexpr() for c in self.children)
        return f"({self.rule_id} {inner})"

    @staticmethod
    def from_sexpr(text: str) -> "BodyNode":
        tokens = re.findall(r"\(|\)|\*|[^\s()*]+", text)
        pos = 0

        def parse() -> "BodyNode":
            nonlocal pos
            if pos >= len(tokens) or tokens[pos] != "(":
                raise EBLError(f"malformed body expression {text!r}")
            pos += 1
            rid = tokens[pos]
            pos += 1
            kids: list[Optional[BodyNode]] = []
            while pos < len(tokens) and tokens[pos] != ")":
                if tokens[pos] == "*":
                    kids.append(None)
                    pos += 1
                else:
                    kids.append(parse())
            if pos >= len(tokens):
                raise EBLError(f"unbalanced body expression {text!r}")
            pos += 1
            return BodyNode(rid, tuple(kids))

        node = parse()
        if pos != len(tokens):
            raise EBLError(f"trailing tokens in body expression {text!r}")
        return node


@dataclass(frozen=True)
class MacroRule:
    rule: Rule           # lhs/rhs carry the composed feature constraints
    body: BodyNode
    frequency: int = 1

    @property
    def id(self) -> str:
        return self.rule.id

    @property
    def lhs(self) -> Category:
        return self.rule.lhs

    @property
    def rhs(self) -> tuple[Category, ...]:
        return self.rule.rhs


def canonicalize_categories(cats: list[Category]) -> list[Category]:
    """Joint positional variable renaming across several categories."""
    mapping: dict[Var, Var] = {}
    out = []
    for cat in cats:
        pairs = {}
        for k, v in cat.features.pairs:
            if isinstance(v, Var):
                if v not in mapping:
                    mapping[v] = Var(f"V{len(mapping)}")
                v = mapping[v]
            pairs[k] = v
        out.append(Category(cat.symbol, FeatureTerm.of(pairs)))
    return out


def _compose(body: BodyNode, grammar: Grammar) -> tuple[Category, list[Category], Rule]:
    """Compose the chunk's rules into one (lhs, rhs) constraint pair."""
    subst: dict = {}
    counter = itertools.count()
    rhs_cats: list[Category] = []

    def walk(b: BodyNode) -> Category:
        rule = grammar.rule_by_id.get(b.rule_id)
        if rule is None:
            raise EBLError(f"body references unknown rule {b.rule_id}")
        if len(b.children) != len(rule.rhs):
            raise EBLError(f"body arity mismatch for rule {b.rule_id}")
        suffix = f"!{next(counter)}"
        for slot, child in zip(rule.rhs, b.children):
            slot_feats = slot.features.rename(suffix)
            if child is None:
                rhs_cats.append(Category(slot.symbol, slot_feats))
            else:
                child_lhs = walk(child)
                if child_lhs.symbol != slot.symbol:
                    raise EBLError(f"body category mismatch under rule {b.rule_id}")
                if not unify_into(slot_feats, child_lhs.features, subst):
                    raise EBLError(f"chunk constraints do not compose in rule {b.rule_id}")
        return Category(rule.lhs.symbol, rule.lhs.features.rename(suffix))

    root_lhs = walk(body)
    cats = [Category(c.symbol, c.features.substitute(subst))
            for c in [root_lhs] + rhs_cats]
    cats = canonicalize_categories(cats)
    return cats[0], cats[1:], grammar.rule_by_id[body.rule_id]


def _macro_from_body(body: BodyNode, grammar: Grammar, frequency: int) -> MacroRule:
    lhs, rhs, root_rule = _compose(body, grammar)
    signature = f"{lhs!r}|{'|'.join(map(repr, rhs))}|{body.to_sexpr()}"
    mid = "m_" + hashlib.sha1(signature.encode()).hexdigest()[:10]
    rule = Rule(mid, lhs, tuple(rhs), NON_PHRASAL, root_rule.level, 0, root_rule.mood)
    return MacroRule(rule, body, frequency)


def _chunk(node: RuleNode, grammar: Grammar,
           criteria: CutCriteria) -> tuple[BodyNode, list[Derivation]]:
    """One chunk rooted at node: its body template and frontier nodes."""
    frontier: list[Derivation] = []

    def build(n: RuleNode) -> BodyNode:
        rule = grammar.rule_by_id.get(n.rule_id)
        if rule is None:
            raise EBLError(f"derivation uses unknown rule {n.rule_id}")
        kids: list[Optional[BodyNode]] = []
        for ch in n.children:
            if isinstance(ch, RuleNode):
                ch_rule = grammar.rule_by_id.get(ch.rule_id)
                if ch_rule is None:
                    raise EBLError(f"derivation uses unknown rule {ch.rule_id}")
                if not ch_rule.is_phrasal and ch.symbol not in criteria.cut_categories:
                    kids.append(build(ch))
                    continue
            elif isinstance(ch, (LexLeaf, WordLeaf)) and not criteria.include_lexical_frontier:
                raise EBLError("lexical frontier disallowed by the cut criteria")
            frontier.append(ch)
            kids.append(None)
        return BodyNode(n.rule_id, tuple(kids))

    return build(node), frontier


def chunk_derivation(d: Derivation, grammar: Grammar,
                     criteria: CutCriteria) -> list[MacroRule]:
    """Cut a derivation into macro-rules (frequency 1 each, document order)."""
    if not isinstance(d, RuleNode):
        return []
    root_rule = grammar.rule_by_id.get(d.rule_id)
    if root_rule is None:
        raise EBLError(f"derivation uses unknown rule {d.rule_id}")
    if root_rule.is_phrasal:
        return []
    out: list[MacroRule] = []

    def chunk_at(node: RuleNode):
        body, frontier = _chunk(node, grammar, criteria)
        out.append(_macro_from_body(body, grammar, 1))
        for f in frontier:
            if isinstance(f, RuleNode) and not grammar.rule_by_id[f.rule_id].is_phrasal:
                chunk_at(f)

    chunk_at(d)
    return out


def rewrite_derivation(d: Derivation, grammar: Grammar,
                       criteria: CutCriteria) -> Derivation:
    """The derivation as the specialized grammar would produce it: each chunk
    collapsed into a single macro-rule node over its frontier."""
    if not isinstance(d, RuleNode):
        return d
    rule = grammar.rule_by_id[d.rule_id]
    if rule.is_phrasal:
        return d
    body, frontier = _chunk(d, grammar, criteria)
    macro = _macro_from_body(body, grammar, 1)
    kids = tuple(rewrite_derivation(f, grammar, criteria) for f in frontier)
    return RuleNode(macro.id, d.symbol, d.frm, d.to, kids)


@dataclass
class SpecializedGrammar:
    original: Grammar
    macros: list[MacroRule]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.macro_by_id = {m.id: m for m in self.macros}
        if len(self.macro_by_id) != len(self.macros):
            raise EBLError("duplicate macro-rules")

    @property
    def parse_rules(self) -> list[Rule]:
        return self.original.phrasal_rules + [m.rule for m in self.macros]

    @property
    def start(self) -> Category:
        return self.original.start

    def expand_derivation(self, d: Derivation) -> Derivation:
        return expand(d, self)

    def fingerprint(self) -> str:
        return hashlib.sha1(specialized_to_text(self).encode()).hexdigest()[:12]


def specialize(treebank: Iterable["TreebankEntry"], grammar: Grammar,
               criteria: CutCriteria) -> SpecializedGrammar:
    """Chunk every approved derivation and merge chunks by structural identity."""
    merged: dict[str, MacroRule] = {}
    entries = list(treebank)
    if not entries:
        raise EBLError("empty treebank")
    for entry in entries:
        for d in entry.approved:
            for m in chunk_derivation(d, grammar, criteria):
                old = merged.get(m.id)
                merged[m.id] = MacroRule(m.rule, m.body,
                                         (old.frequency if old else 0) + 1)
    macros = [m for m in merged.values() if m.frequency >= criteria.min_frequency]
    macros.sort(key=lambda m: (-m.frequency, m.id))
    return SpecializedGrammar(grammar, macros, {
        "grammar_id": grammar.fingerprint(),
        "cut_categories": sorted(criteria.cut_categories),
        "entries": len(entries),
    })


def expand(d: Derivation, sg: SpecializedGrammar) -> Derivation:
    """Rewrite macro-rule nodes into their original-rule bodies."""
    if not isinstance(d, RuleNode):
        return d
    children = tuple(expand(c, sg) for c in d.children)
    macro = sg.macro_by_id.get(d.rule_id)
    if macro is None:
        return RuleNode(d.rule_id, d.symbol, d.frm, d.to, children)
    slots = iter(children)

    def rebuild(b: BodyNode) -> RuleNode:
        rule = sg.original.rule_by_id[b.rule_id]
        kids: list[Derivation] = []
        for c in b.children:
            kids.append(next(slots) if c is None else rebuild(c))
        return RuleNode(b.rule_id, rule.lhs.symbol, kids[0].frm, kids[-1].to, tuple(kids))

    node = rebuild(macro.body)
    leftovers = list(slots)
    if leftovers:
        raise EBLError(f"macro {d.rule_id}: body template does not consume all children")
    return node


def validate_expansion(d: Derivation, grammar: Grammar) -> bool:
    """Check that a derivation is well-formed under the original grammar.

    A lexical leaf does not record which feature variant of its entry was
    used (a word may have several entries with the same tag and category),
    so every matching entry is tried.
    """
    from .chart import Constituent, canonicalize_term, instantiate

    def check(n: Derivation) -> list:
        if isinstance(n, LexLeaf):
            return [Constituent(n.frm, n.to, n.symbol,
                                canonicalize_term(e.category.features), n, 1)
                    for e in grammar.entries_for(n.word)
                    if e.tag == n.tag and e.category.symbol == n.symbol
                    and e.sem == n.sem]
        if not isinstance(n, RuleNode):
            return []
        rule = grammar.rule_by_id.get(n.rule_id)
        if rule is None or len(rule.rhs) != len(n.children):
            return []
        options = [check(c) for c in n.children]
        if any(not opts for opts in options):
            return []
        out, seen = [], set()
        for combo in itertools.product(*options):
            if any(a.to != b.frm for a, b in zip(combo, combo[1:])):
                continue
            c = instantiate(rule, combo, "!v")
            if c is not None and c.bindings not in seen:
                seen.add(c.bindings)
                out.append(c)
        return out

    return bool(check(d))


# ---------------------------------------------------------------------------
# File format: base grammar DSL plus macro lines
# ---------------------------------------------------------------------------

def specialized_to_text(sg: SpecializedGrammar) -> str:
    lines = [serialize_grammar(sg.original).rstrip("\n")]
    for m in sg.macros:
        lines.append(f"macro {m.id} freq={m.frequency} body={m.body.to_sexpr()}")
    return "\n".join(lines) + "\n"


_MACRO_RE = re.compile(r"macro\s+(\S+)\s+freq=(\d+)\s+body=(.+)$")


def load_specialized(text: str) -> SpecializedGrammar:
    grammar = load_grammar(text)
    macros = []
    for lineno, line in getattr(grammar, "macro_lines", []):
        m = _MACRO_RE.match(line)
        if not m:
            raise GrammarError(f"malformed macro line {line!r}", lineno)
        mid, freq, sexpr = m.groups()
        macro = _macro_from_body(BodyNode.from_sexpr(sexpr), grammar, int(freq))
        if macro.id != mid:
            macro = MacroRule(Rule(mid, macro.rule.lhs, macro.rule.rhs, NON_PHRASAL,
                                   macro.rule.level, 0, macro.rule.mood),
                              macro.body, int(freq))
        macros.append(macro)
    return SpecializedGrammar(grammar, macros)
