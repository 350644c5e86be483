"""Dual-method translation over a chart mirroring the source chart.

Surface translation tiles a fragment's words with bilingual phrase
entries, longest match first, passing unknown words through with a
penalty.  Deep translation rewrites the fragment's predicate-argument
tree with transfer rules, ranks candidates by lexical preference weights,
and only applies to phrasal or full-parse fragments.  Both methods insert
edges between the same vertices their source fragment spans, so the
stack decoder can extract a current-best translation at any time.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .chart import Constituent, Derivation, LexLeaf, RuleNode, WordLeaf
from .decoder import ScoreConfig, best_sequence
from .ebl import SpecializedGrammar
from .grammar import Grammar, PredTree, TransferRule, Var


class TranslationError(Exception):
    pass


# ---------------------------------------------------------------------------
# Bilingual phrase lexicon
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BilingualPhraseEntry:
    source: tuple[str, ...]
    target: tuple[str, ...]          # may be empty: a deletion entry
    tags: Optional[tuple[str, ...]] = None
    weight: float = 1.0

    def __post_init__(self):
        if not self.source:
            raise ValueError("source phrase must be nonempty")
        if self.tags is not None and len(self.tags) != len(self.source):
            raise ValueError("one tag per source word when tags are given")


_BL_RE = re.compile(
    r'src\s+"([^"]+)"(?:\s+tag=(\S+))?\s*=>\s*tgt\s+"([^"]*)"(?:\s+weight=(\S+))?\s*$')


def load_bilingual(text: str) -> list[BilingualPhraseEntry]:
    """Parse lexicon lines: src "<words>" [tag=<T[,T...]>] => tgt "<words>" weight=<w>."""
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _BL_RE.match(line)
        if not m:
            raise TranslationError(f"malformed bilingual entry at line {lineno}: {raw!r}")
        src, tag, tgt, weight = m.groups()
        tags = tuple(tag.split(",")) if tag else None
        entries.append(BilingualPhraseEntry(
            tuple(src.split()), tuple(tgt.split()), tags,
            float(weight) if weight else 1.0))
    return entries


@dataclass
class LexPreference:
    weights: dict[tuple[str, str, Optional[str]], float] = field(default_factory=dict)

    def __post_init__(self):
        import math
        for key, w in self.weights.items():
            if not math.isfinite(w):
                raise ValueError(f"non-finite preference weight for {key}")

    def weight(self, head: str, target: str, context: Optional[str]) -> float:
        key = (head, target, context)
        if key in self.weights:
            return self.weights[key]
        return self.weights.get((head, target, None), 0.0)

    def save(self, path: str):
        with open(path, "w", encoding="utf-8") as fh:
            for (h, t, c), w in sorted(self.weights.items(),
                                       key=lambda kv: (kv[0][0], kv[0][1], kv[0][2] or "")):
                fh.write(json.dumps({"head": h, "target": t, "context": c, "weight": w}) + "\n")

    @staticmethod
    def load(path: str) -> "LexPreference":
        prefs = LexPreference()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rec = json.loads(line)
                    prefs.weights[(rec["head"], rec["target"], rec.get("context"))] = \
                        float(rec["weight"])
        return prefs


def estimate_preferences(pairs: Iterable[tuple[str, str]],
                         rules: Sequence[TransferRule]) -> LexPreference:
    """Crude preference estimation from a parallel corpus: for each leaf
    transfer rule, count how often its target word appears in the reference
    translation of sentences containing its source word."""
    leaf_rules = {(r.source.functor, " ".join(_target_leaf_words(r.target)))
                  for r in rules if r.source.is_leaf() and isinstance(r.source.functor, str)}
    heads = {h for h, _ in leaf_rules}
    counts: dict[tuple[str, str], int] = {}
    totals: dict[str, int] = {}
    for src_sentence, ref in pairs:
        src_words = set(src_sentence.split())
        ref_words = set(ref.split())
        for head in heads & src_words:
            totals[head] = totals.get(head, 0) + 1
        for head, tgt in leaf_rules:
            if head in src_words and set(tgt.split()) <= ref_words:
                counts[(head, tgt)] = counts.get((head, tgt), 0) + 1
    prefs = LexPreference()
    for (head, tgt), n in counts.items():
        prefs.weights[(head, tgt, None)] = n / totals[head]
    return prefs


def _target_leaf_words(t: PredTree) -> list[str]:
    if isinstance(t.functor, str) and t.is_leaf():
        return t.functor.split()
    return []


# ---------------------------------------------------------------------------
# Predicate-argument analysis trees
# ---------------------------------------------------------------------------

def analysis_tree(d: Derivation, grammar: Grammar,
                  specialized: Optional[SpecializedGrammar] = None) -> PredTree:
    """Head-first predicate-argument tree for a derivation; macro nodes are
    expanded into original rules first."""
    if specialized is not None:
        d = specialized.expand_derivation(d)

    def walk(n: Derivation) -> PredTree:
        if isinstance(n, LexLeaf):
            return PredTree(n.sem)
        if isinstance(n, WordLeaf):
            return PredTree(n.word)
        rule = grammar.rule_by_id.get(n.rule_id)
        if rule is None:
            raise TranslationError(f"derivation uses unknown rule {n.rule_id}")
        head = walk(n.children[rule.head])
        args = tuple(walk(c) for i, c in enumerate(n.children) if i != rule.head)
        return PredTree(head.functor, head.args + args)

    return walk(d)


def semantic_triples(t: PredTree) -> list[str]:
    """Head+modifier(+dependent) strings, e.g. ``flight+to+boston``."""
    out = []
    for arg in t.args:
        if arg.args:
            out.append(f"{t.functor}+{arg.functor}+{arg.args[0].functor}")
        else:
            out.append(f"{t.functor}+{arg.functor}")
        out.extend(semantic_triples(arg))
    return out


def derivation_mood(d: Derivation, grammar: Grammar,
                    specialized: Optional[SpecializedGrammar] = None) -> str:
    if isinstance(d, RuleNode):
        rule = None
        if specialized is not None:
            rule = specialized.macro_by_id.get(d.rule_id)
        rule = rule.rule if rule is not None else grammar.rule_by_id.get(d.rule_id)
        if rule is not None and rule.mood:
            return rule.mood
    return "dcl"


# ---------------------------------------------------------------------------
# Translation chart
# ---------------------------------------------------------------------------

SURFACE = "surface"
DEEP = "deep"


@dataclass(frozen=True)
class TranslationEdge:
    frm: int
    to: int
    text: tuple[str, ...]
    method: str
    score: float
    provenance: tuple = ()

    # decoder protocol
    @property
    def acoustic(self) -> float:
        return 0.0

    @property
    def linguistic(self) -> float:
        return self.score

    @property
    def level(self) -> int:
        return 2 if self.method == DEEP else 1

    @property
    def words(self) -> tuple[str, ...]:
        return self.text


class TranslationChart:
    """Target-side chart whose vertices mirror the source chart's."""

    def __init__(self, vertex_count: int):
        self.vertex_count = vertex_count
        self.edges: list[TranslationEdge] = []
        self._seen: set = set()

    def insert(self, edge: TranslationEdge, fragment: Constituent):
        if (edge.frm, edge.to) != (fragment.frm, fragment.to):
            raise TranslationError(
                f"edge span ({edge.frm},{edge.to}) does not mirror "
                f"fragment span ({fragment.frm},{fragment.to})")
        key = (edge.frm, edge.to, edge.text, edge.method, edge.score)
        if key not in self._seen:
            self._seen.add(key)
            self.edges.append(edge)

    def decoder_edges(self) -> list[TranslationEdge]:
        return list(self.edges)


# ---------------------------------------------------------------------------
# Surface method
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TranslationConfig:
    passthrough_penalty: float = -1.0
    deep_bonus: float = 2.0
    top_k_deep: int = 2
    max_rule_depth: int = 10
    # the fragment penalty must exceed deep_bonus + max level bonus, or the
    # extraction would prefer many small deep edges over one spanning edge
    score: ScoreConfig = field(default_factory=lambda: ScoreConfig(
        w_acoustic=1.0, w_linguistic=1.0, fragment_penalty=3.0,
        level_bonus={0: 0.0, 1: 0.0, 2: 0.1}))


def _fragment_tags(fragment: Constituent) -> list[Optional[str]]:
    tags: list[Optional[str]] = []

    def walk(d: Derivation):
        if isinstance(d, LexLeaf):
            tags.append(d.tag)
        elif isinstance(d, WordLeaf):
            tags.append(None)
        else:
            for c in d.children:
                walk(c)

    walk(fragment.derivation)
    return tags


def surface_translate(fragment: Constituent, lexicon: Sequence[BilingualPhraseEntry],
                      config: TranslationConfig = TranslationConfig()) -> list[TranslationEdge]:
    """Greedy longest-match tiling, left to right; untiled words pass through."""
    words = list(fragment.words)
    tags = _fragment_tags(fragment)
    if not words:
        raise TranslationError("empty fragment")
    by_first: dict[str, list[BilingualPhraseEntry]] = {}
    for e in lexicon:
        by_first.setdefault(e.source[0], []).append(e)

    out_words: list[str] = []
    used: list[BilingualPhraseEntry] = []
    score = 0.0
    i = 0
    while i < len(words):
        best: Optional[BilingualPhraseEntry] = None
        for e in by_first.get(words[i], []):
            k = len(e.source)
            if tuple(words[i:i + k]) != e.source:
                continue
            if e.tags is not None and any(
                    t != have for t, have in zip(e.tags, tags[i:i + k])):
                continue
            if best is None or (len(e.source), e.weight, e.target) > (
                    len(best.source), best.weight, best.target):
                best = e
        if best is None:
            out_words.append(words[i])
            score += config.passthrough_penalty
            i += 1
        else:
            out_words.extend(best.target)
            used.append(best)
            score += best.weight
            i += len(best.source)
    provenance = (f"fragment:{fragment.frm}-{fragment.to}",
                  *(" ".join(e.source) for e in used))
    return [TranslationEdge(fragment.frm, fragment.to, tuple(out_words), SURFACE,
                            score, provenance)]


# ---------------------------------------------------------------------------
# Deep method
# ---------------------------------------------------------------------------

def match_pattern(pattern: PredTree, tree: PredTree, binding: dict) -> bool:
    f = pattern.functor
    if isinstance(f, Var):
        if not pattern.args:
            if f in binding:
                return binding[f] == tree
            binding[f] = tree
            return True
        if f in binding and binding[f] != tree.functor:
            return False
        binding[f] = tree.functor
    elif f != tree.functor:
        return False
    if len(pattern.args) != len(tree.args):
        return False
    return all(match_pattern(p, t, binding) for p, t in zip(pattern.args, tree.args))


@dataclass(frozen=True)
class Candidate:
    words: tuple[str, ...]
    score: float
    rules_used: tuple[str, ...] = ()


class _DeepTranslator:
    def __init__(self, rules: Sequence[TransferRule], prefs: LexPreference,
                 level: int, config: TranslationConfig):
        self.rules = [r for r in rules if r.level <= level]
        self.prefs = prefs
        self.config = config

    def lexical(self, symbol: str, parent: Optional[str], depth: int) -> Candidate:
        """Best target rendering of a single predicate symbol."""
        if symbol.startswith("_"):
            return Candidate((), 0.0)
        if depth < self.config.max_rule_depth:
            options = []
            for r in self.rules:
                if r.source.is_leaf() and r.source.functor == symbol:
                    cand = self.gen(r.target, {}, symbol, depth + 1)
                    tgt = " ".join(cand.words)
                    w = self.prefs.weight(symbol, tgt, parent)
                    options.append(Candidate(cand.words, cand.score + w,
                                             cand.rules_used + (r.id,)))
            if options:
                options.sort(key=lambda c: (-c.score, c.words))
                return options[0]
        return Candidate(tuple(symbol.split()), 0.0)

    def gen(self, node: PredTree, binding: dict, parent: Optional[str],
            depth: int) -> Candidate:
        f = node.functor
        if isinstance(f, Var):
            val = binding[f]
            if isinstance(val, PredTree) and not node.args:
                return self.best_subtree(val, parent, depth)
            f = val if isinstance(val, str) else val.functor
        head = self.lexical(f, parent, depth)
        words, score, used = list(head.words), head.score, list(head.rules_used)
        for arg in node.args:
            sub = self.gen(arg, binding, f if not f.startswith("_") else parent, depth)
            words.extend(sub.words)
            score += sub.score
            used.extend(sub.rules_used)
        return Candidate(tuple(words), score, tuple(used))

    def matched_candidates(self, tree: PredTree, parent: Optional[str],
                           depth: int) -> list[Candidate]:
        out = []
        for r in self.rules:
            if r.source.is_leaf():
                continue  # leaf rules are lexical mappings, applied in gen
            binding: dict = {}
            if match_pattern(r.source, tree, binding):
                cand = self.gen(r.target, binding, parent, depth + 1)
                out.append(Candidate(cand.words, cand.score, cand.rules_used + (r.id,)))
        out.sort(key=lambda c: (-c.score, c.words))
        return out

    def candidates(self, tree: PredTree, parent: Optional[str] = None,
                   depth: int = 0) -> list[Candidate]:
        if depth >= self.config.max_rule_depth:
            return [self.flatten(tree, parent, depth)]
        out = self.matched_candidates(tree, parent, depth)
        if not out:
            out.append(self.flatten(tree, parent, depth))
        return out

    def best_subtree(self, tree: PredTree, parent: Optional[str], depth: int) -> Candidate:
        return self.candidates(tree, parent, depth)[0]

    def flatten(self, tree: PredTree, parent: Optional[str], depth: int) -> Candidate:
        """Fallback: head-first flattening with lexical mapping per symbol."""
        head = self.lexical(str(tree.functor), parent, depth)
        words, score, used = list(head.words), head.score, list(head.rules_used)
        for arg in tree.args:
            sub = self.best_subtree(arg, str(tree.functor), depth + 1)
            words.extend(sub.words)
            score += sub.score
            used.extend(sub.rules_used)
        return Candidate(tuple(words), score, tuple(used))


def deep_translate(fragment: Constituent, tree: PredTree,
                   rules: Sequence[TransferRule], prefs: LexPreference,
                   config: TranslationConfig = TranslationConfig()) -> list[TranslationEdge]:
    """Transfer-rule translation of a phrasal or full-parse fragment.

    All matching rules generate candidates, ordered by summed preference
    weight; the top-k become deep edges carrying the deep-method bonus.
    """
    if fragment.level < 2:
        raise TranslationError("deep translation applies to phrasal or full fragments only")
    engine = _DeepTranslator(rules, prefs, fragment.level, config)
    # no rule matching the tree root means no deep translation; the caller
    # falls back to the surface method
    cands = engine.matched_candidates(tree, None, 0)
    return [TranslationEdge(fragment.frm, fragment.to, c.words, DEEP,
                            c.score + config.deep_bonus,
                            (f"fragment:{fragment.frm}-{fragment.to}", *c.rules_used))
            for c in cands[:config.top_k_deep]]


# ---------------------------------------------------------------------------
# Anytime refinement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Emission:
    iteration: int
    stage: str
    text: str
    score: float


@dataclass
class TranslationResources:
    lexicon: Sequence[BilingualPhraseEntry]
    rules: Sequence[TransferRule] = ()
    prefs: LexPreference = field(default_factory=LexPreference)
    grammar: Optional[Grammar] = None
    specialized: Optional[SpecializedGrammar] = None
    config: TranslationConfig = field(default_factory=TranslationConfig)


def anytime_translate(stage_fragments: Iterable[tuple[str, Sequence[Constituent]]],
                      vertex_count: int, resources: TranslationResources,
                      time_limit: float = 30.0, deep: bool = True,
                      clock: Callable[[], float] = time.monotonic) -> list[Emission]:
    """Translate each stage's fragment sequence as it arrives, emitting the
    current best translation after every stage until fragments run out or
    the time limit is exceeded."""
    if time_limit <= 0:
        raise TranslationError("time limit must be positive")
    config = resources.config
    chart = TranslationChart(vertex_count)
    emissions: list[Emission] = []
    started = clock()
    for stage, fragments in stage_fragments:
        if clock() - started > time_limit:
            break
        inserted = False
        for fragment in fragments:
            for edge in surface_translate(fragment, resources.lexicon, config):
                chart.insert(edge, fragment)
                inserted = True
            if deep and fragment.level >= 2 and resources.grammar is not None:
                tree = analysis_tree(fragment.derivation, resources.grammar,
                                     resources.specialized)
                for edge in deep_translate(fragment, tree, resources.rules,
                                           resources.prefs, config):
                    chart.insert(edge, fragment)
                    inserted = True
        if not inserted and emissions:
            continue
        path = best_sequence(chart, config.score)
        emissions.append(Emission(len(emissions) + 1, stage,
                                  " ".join(path.words()), path.total_score))
    return emissions
