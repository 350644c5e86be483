"""SLR(1) tables over the specialized grammar's backbone, driven GLR-style.

Features are erased for table construction and enforced at reduce time:
each reduction re-unifies the macro- or phrasal-rule constraints against
the popped constituents, and branches whose unification fails die.
Conflicts are kept as multi-action sets and explored nondeterministically,
so the driver enumerates every analysis (no packing).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .chart import Constituent, ParseError, instantiate
from .ebl import SpecializedGrammar
from .grammar import Grammar, Rule

END = "$end"
AUGMENTED = "$start"


def _rules_of(g: Union[Grammar, SpecializedGrammar]) -> list[Rule]:
    rules = getattr(g, "parse_rules", None)
    if rules is None:
        rules = g.rules
    return list(rules)


@dataclass(frozen=True)
class Action:
    kind: str                  # shift | reduce | accept
    target: Optional[int] = None
    rule_id: Optional[str] = None

    def to_json(self):
        if self.kind == "shift":
            return ["shift", self.target]
        if self.kind == "reduce":
            return ["reduce", self.rule_id]
        return ["accept"]


@dataclass
class LRTable:
    productions: list[tuple[str, tuple[str, ...], Optional[str]]]
    states: list[tuple[tuple[int, int], ...]]   # kernels as (prod, dot) items
    actions: dict[tuple[int, str], tuple[Action, ...]]
    gotos: dict[tuple[int, str], int]
    terminals: set[str]
    nonterminals: set[str]

    @property
    def state_count(self) -> int:
        return len(self.states)

    def conflicts(self) -> list[tuple[int, str]]:
        return sorted(k for k, v in self.actions.items() if len(v) > 1)

    def to_json(self) -> str:
        return json.dumps({
            "productions": [[l, list(r), rid] for l, r, rid in self.productions],
            "states": [[list(item) for item in kernel] for kernel in self.states],
            "actions": {f"{s} {sym}": [a.to_json() for a in acts]
                        for (s, sym), acts in sorted(self.actions.items())},
            "gotos": {f"{s} {sym}": t for (s, sym), t in sorted(self.gotos.items())},
        }, indent=1, sort_keys=True)


def compile_lr(g: Union[Grammar, SpecializedGrammar]) -> LRTable:
    """SLR(1) construction over the feature-erased backbone.

    Deterministic: canonical item ordering, breadth-first state numbering.
    Conflicts are represented as multi-element action sets, never dropped.
    """
    rules = _rules_of(g)
    if not rules:
        raise ParseError("cannot compile an empty grammar")
    start_symbol = g.start.symbol
    productions: list[tuple[str, tuple[str, ...], Optional[str]]] = [
        (AUGMENTED, (start_symbol, END), None)]
    rule_for_prod: list[Optional[Rule]] = [None]
    for r in rules:
        productions.append((r.lhs.symbol, tuple(c.symbol for c in r.rhs), r.id))
        rule_for_prod.append(r)

    nonterminals = {lhs for lhs, _, _ in productions}
    terminals = {s for _, rhs, _ in productions for s in rhs} - nonterminals
    prods_by_lhs: dict[str, list[int]] = {}
    for i, (lhs, _, _) in enumerate(productions):
        prods_by_lhs.setdefault(lhs, []).append(i)

    # FIRST sets (no epsilon productions: every rhs is nonempty)
    first: dict[str, set[str]] = {t: {t} for t in terminals}
    for nt in nonterminals:
        first[nt] = set()
    changed = True
    while changed:
        changed = False
        for lhs, rhs, _ in productions:
            f = first[rhs[0]]
            if not f <= first[lhs]:
                first[lhs] |= f
                changed = True

    follow: dict[str, set[str]] = {nt: set() for nt in nonterminals}
    changed = True
    while changed:
        changed = False
        for lhs, rhs, _ in productions:
            for i, sym in enumerate(rhs):
                if sym not in nonterminals:
                    continue
                trailer = first[rhs[i + 1]] if i + 1 < len(rhs) else follow[lhs]
                if not trailer <= follow[sym]:
                    follow[sym] |= trailer
                    changed = True

    def closure(kernel: frozenset[tuple[int, int]]) -> frozenset[tuple[int, int]]:
        items = set(kernel)
        work = list(kernel)
        while work:
            pi, dot = work.pop()
            rhs = productions[pi][1]
            if dot < len(rhs) and rhs[dot] in nonterminals:
                for pj in prods_by_lhs[rhs[dot]]:
                    if (pj, 0) not in items:
                        items.add((pj, 0))
                        work.append((pj, 0))
        return frozenset(items)

    start_kernel = frozenset({(0, 0)})
    kernels: list[frozenset] = [start_kernel]
    numbering = {start_kernel: 0}
    gotos: dict[tuple[int, str], int] = {}
    actions: dict[tuple[int, str], set[Action]] = {}
    queue = [start_kernel]
    while queue:
        kernel = queue.pop(0)
        state = numbering[kernel]
        items = closure(kernel)
        moves: dict[str, set[tuple[int, int]]] = {}
        for pi, dot in sorted(items):
            lhs, rhs, rid = productions[pi]
            if dot < len(rhs):
                sym = rhs[dot]
                if sym == END:
                    actions.setdefault((state, END), set()).add(Action("accept"))
                else:
                    moves.setdefault(sym, set()).add((pi, dot + 1))
            elif pi != 0:
                for t in sorted(follow[lhs]):
                    actions.setdefault((state, t), set()).add(
                        Action("reduce", rule_id=rid))
        for sym in sorted(moves):
            nk = frozenset(moves[sym])
            if nk not in numbering:
                numbering[nk] = len(kernels)
                kernels.append(nk)
                queue.append(nk)
            target = numbering[nk]
            if sym in terminals or sym == END:
                actions.setdefault((state, sym), set()).add(Action("shift", target))
            else:
                gotos[(state, sym)] = target

    frozen = {k: tuple(sorted(v, key=lambda a: (a.kind, a.target or 0, a.rule_id or "")))
              for k, v in actions.items()}
    return LRTable(productions, [tuple(sorted(k)) for k in kernels], frozen, gotos,
                   terminals, nonterminals | {AUGMENTED})


# ---------------------------------------------------------------------------
# GLR driving
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StackNode:
    """Graph-structured stack node: a state plus a backlink and the
    constituent shifted or reduced onto it."""
    state: int
    back: Optional["StackNode"]
    value: Optional[Constituent]


class ParseStackGraph:
    """The set of live stack tops at one input position."""

    def __init__(self, tops: Iterable[StackNode]):
        self.tops = list(tops)

    def __len__(self):
        return len(self.tops)


def glr_parse(tokens: Sequence[Union[Constituent, Sequence[Constituent]]],
              table: LRTable, g: Union[Grammar, SpecializedGrammar],
              max_steps: int = 1_000_000) -> list[Constituent]:
    """Drive the table over a token sequence, all actions breadth-synchronously.

    Each position may offer several alternative constituents (lexical
    ambiguity).  Feature constraints are unified at reduce; failing
    branches die.  Returns all complete start-category analyses.
    """
    rules = {r.id: r for r in _rules_of(g)}
    positions: list[list[Constituent]] = []
    for tok in tokens:
        positions.append([tok] if isinstance(tok, Constituent) else list(tok))
    counter = itertools.count(1)
    steps = 0

    def advance(tops: list[StackNode], alt: Optional[Constituent],
                symbol: str) -> tuple[list[StackNode], list[Constituent]]:
        nonlocal steps
        shifted: list[StackNode] = []
        accepted: list[Constituent] = []
        work = list(tops)
        seen: set[tuple[int, int, tuple]] = set()
        while work:
            steps += 1
            if steps > max_steps:
                raise ParseError("GLR step cap exceeded; grammar may cycle")
            node = work.pop(0)
            for act in table.actions.get((node.state, symbol), ()):
                if act.kind == "shift":
                    shifted.append(StackNode(act.target, node, alt))
                elif act.kind == "accept":
                    if node.value is not None:
                        accepted.append(node.value)
                else:
                    rule = rules[act.rule_id]
                    children: list[Constituent] = []
                    base = node
                    for _ in rule.rhs:
                        children.append(base.value)
                        base = base.back
                    children.reverse()
                    new = instantiate(rule, children, f"#g{next(counter)}")
                    if new is None:
                        continue
                    goto = table.gotos.get((base.state, rule.lhs.symbol))
                    if goto is None:
                        continue
                    fresh = StackNode(goto, base, new)
                    key = (fresh.state, id(fresh.back), new.key())
                    if key not in seen:
                        seen.add(key)
                        work.append(fresh)
        return shifted, accepted

    tops = [StackNode(0, None, None)]
    for alts in positions:
        nxt: list[StackNode] = []
        for alt in alts:
            shifted, _ = advance(tops, alt, alt.symbol)
            nxt.extend(shifted)
        tops = nxt
        if not tops:
            return []
    _, accepted = advance(tops, None, END)
    # enumeration can reach the same analysis through distinct stack
    # interleavings only when action sets overlap; deduplicate by identity key
    out: list[Constituent] = []
    seen_keys = set()
    for c in accepted:
        if c.key() not in seen_keys:
            seen_keys.add(c.key())
            out.append(c)
    return out


def lexical_alternatives(words: Sequence[str], grammar: Grammar) -> list[list[Constituent]]:
    """Level-1 constituent alternatives per position, as the driver's input."""
    from .chart import Chart, lexical_pass
    from .lattice import linear_lattice

    chart = Chart(linear_lattice(" ".join(words)))
    lexical_pass(chart, grammar)
    return [[c for c in chart.starting_at(i) if c.level == 1]
            for i in range(len(words))]
