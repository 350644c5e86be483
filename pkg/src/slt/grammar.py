"""Feature-constraint grammar: flat feature terms, unification, and the grammar DSL.

The formalism is deliberately small: categories carry flat feature terms
(feature name -> atom or variable), rules are split into phrasal and
non-phrasal sets, and the lexicon holds full word forms.  Variables are
rule-local; they are renamed apart at every instantiation.

The DSL read by :func:`load_grammar` is line-oriented:

    # comment
    categories: S NP VP Det Noun
    tags: DT NN VB
    start: S
    rule np1: NP[num=N] -> Det[num=N] Noun[num=N] phrasal head=1
    rule s1:  S[] -> NP[num=N] VP[num=N] level=2 head=1 mood=dcl
    lex "flights": Noun[num=pl] tag=NNS sem=flight
    xfer t1: show(X, Y) => _s(montrez, X, Y) level=3

Values starting with an upper-case letter are variables; everything else
is an atom.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Union


class GrammarError(Exception):
    """Raised for malformed DSL documents; carries a 1-based line number."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"{message} at line {line}" if line else message)


# ---------------------------------------------------------------------------
# Feature terms and unification
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Var:
    """A rule-local variable occurring as a feature value."""

    name: str

    def __repr__(self):
        return f"?{self.name}"


Value = Union[str, Var]


@dataclass(frozen=True)
class FeatureTerm:
    """Immutable flat feature term: sorted (name, value) pairs."""

    pairs: tuple[tuple[str, Value], ...] = ()

    @staticmethod
    def of(mapping: Mapping[str, Value] | Iterable[tuple[str, Value]] = ()) -> "FeatureTerm":
        items = dict(mapping)
        return FeatureTerm(tuple(sorted(items.items())))

    def get(self, name: str) -> Optional[Value]:
        for k, v in self.pairs:
            if k == name:
                return v
        return None

    def items(self) -> Iterator[tuple[str, Value]]:
        return iter(self.pairs)

    def __bool__(self):
        return bool(self.pairs)

    def substitute(self, subst: Mapping[Var, Value]) -> "FeatureTerm":
        return FeatureTerm.of({k: walk(v, subst) for k, v in self.pairs})

    def rename(self, suffix: str) -> "FeatureTerm":
        """Rename all variables apart (fresh per rule instantiation)."""
        return FeatureTerm.of(
            {k: Var(v.name + suffix) if isinstance(v, Var) else v for k, v in self.pairs}
        )

    def variables(self) -> set[Var]:
        return {v for _, v in self.pairs if isinstance(v, Var)}

    def __repr__(self):
        inner = ",".join(f"{k}={v}" for k, v in self.pairs)
        return f"[{inner}]"


EMPTY = FeatureTerm()


def walk(value: Value, subst: Mapping[Var, Value]) -> Value:
    """Follow variable bindings to their representative."""
    seen = set()
    while isinstance(value, Var) and value in subst:
        if value in seen:  # defensive; bind() never creates cycles
            break
        seen.add(value)
        value = subst[value]
    return value


def bind(a: Value, b: Value, subst: dict[Var, Value]) -> bool:
    """Unify two walked values under subst; mutates subst, False on clash."""
    a, b = walk(a, subst), walk(b, subst)
    if a == b:
        return True
    if isinstance(a, Var):
        subst[a] = b
        return True
    if isinstance(b, Var):
        subst[b] = a
        return True
    return False  # two distinct atoms


def unify_into(a: FeatureTerm, b: FeatureTerm, subst: dict[Var, Value]) -> bool:
    """Unify shared features of a and b under an accumulating substitution."""
    bmap = dict(b.pairs)
    for k, v in a.pairs:
        if k in bmap and not bind(v, bmap[k], subst):
            return False
    return True


def unify(a: FeatureTerm, b: FeatureTerm) -> Optional[FeatureTerm]:
    """Unify two feature terms.

    Returns the union of features with consistent values (bindings applied),
    or None on an atom clash.  Commutative up to variable renaming.
    """
    subst: dict[Var, Value] = {}
    if not unify_into(a, b, subst):
        return None
    merged = dict(b.pairs)
    merged.update(dict(a.pairs))
    return FeatureTerm.of({k: walk(v, subst) for k, v in merged.items()})


# ---------------------------------------------------------------------------
# Categories, rules, lexicon
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Category:
    symbol: str
    features: FeatureTerm = EMPTY

    def rename(self, suffix: str) -> "Category":
        return Category(self.symbol, self.features.rename(suffix))

    def __repr__(self):
        return f"{self.symbol}{self.features!r}" if self.features else self.symbol


PHRASAL = "phrasal"
NON_PHRASAL = "non-phrasal"


@dataclass(frozen=True)
class Rule:
    """A grammar rule; phrasal rules sit at level 1, non-phrasal at >= 2."""

    id: str
    lhs: Category
    rhs: tuple[Category, ...]
    kind: str = NON_PHRASAL
    level: int = 2
    head: int = 0
    mood: Optional[str] = None

    def __post_init__(self):
        if not self.rhs:
            raise ValueError(f"rule {self.id}: empty right-hand side")
        if self.kind == PHRASAL and self.level != 1:
            raise ValueError(f"rule {self.id}: phrasal rules have level 1")
        if self.kind == NON_PHRASAL and self.level < 2:
            raise ValueError(f"rule {self.id}: non-phrasal level must be >= 2")
        if not 0 <= self.head < len(self.rhs):
            raise ValueError(f"rule {self.id}: head index {self.head} out of range")

    @property
    def is_phrasal(self) -> bool:
        return self.kind == PHRASAL


@dataclass(frozen=True)
class LexEntry:
    surface: str
    category: Category
    tag: str
    sem: str


# ---------------------------------------------------------------------------
# Predicate-argument patterns (transfer rules live in the same DSL)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PredTree:
    """Predicate-argument tree; patterns may use variables.

    In a pattern, ``functor`` may be a Var in two roles: a bare Var leaf
    binds a whole subtree, while a Var with arguments binds just the
    functor symbol (the arguments are matched recursively).
    """

    functor: Value
    args: tuple["PredTree", ...] = ()

    def is_leaf(self) -> bool:
        return not self.args

    def functors(self) -> Iterator[str]:
        if isinstance(self.functor, str):
            yield self.functor
        for a in self.args:
            yield from a.functors()

    def __repr__(self):
        if not self.args:
            return str(self.functor)
        return f"{self.functor}({', '.join(map(repr, self.args))})"


@dataclass(frozen=True)
class TransferRule:
    """Rewrites a source predicate-argument tree into a target one."""

    id: str
    source: PredTree
    target: PredTree
    level: int = 2

    def __post_init__(self):
        src_vars = _pattern_vars(self.source)
        for v in _pattern_vars(self.target):
            if v not in src_vars:
                raise ValueError(f"xfer {self.id}: unbound variable {v.name} in target")


def _pattern_vars(t: PredTree) -> set[Var]:
    out = set()
    if isinstance(t.functor, Var):
        out.add(t.functor)
    for a in t.args:
        out |= _pattern_vars(a)
    return out


# ---------------------------------------------------------------------------
# Grammar
# ---------------------------------------------------------------------------

@dataclass
class Grammar:
    rules: list[Rule]
    lexicon: list[LexEntry]
    categories: set[str]
    tagset: set[str]
    start: Category
    transfer_rules: list[TransferRule] = field(default_factory=list)

    def __post_init__(self):
        self.rule_by_id = {r.id: r for r in self.rules}
        self.entries_by_surface: dict[str, list[LexEntry]] = {}
        for e in self.lexicon:
            self.entries_by_surface.setdefault(e.surface, []).append(e)
        self._validate()

    def _validate(self):
        seen = set()
        for r in self.rules:
            if r.id in seen:
                raise GrammarError(f"duplicate rule id {r.id}")
            seen.add(r.id)
            for cat in (r.lhs, *r.rhs):
                if cat.symbol not in self.categories:
                    raise GrammarError(f"undeclared category {cat.symbol} in rule {r.id}")
        for e in self.lexicon:
            if e.category.symbol not in self.categories:
                raise GrammarError(f"undeclared category {e.category.symbol} for lexeme {e.surface!r}")
            if e.tag not in self.tagset:
                raise GrammarError(f"undeclared tag {e.tag} for lexeme {e.surface!r}")
        if self.start.symbol not in self.categories:
            raise GrammarError(f"undeclared start category {self.start.symbol}")
        if not any(r.lhs.symbol == self.start.symbol for r in self.rules):
            raise GrammarError(f"no rule derives the start category {self.start.symbol}")

    @property
    def phrasal_rules(self) -> list[Rule]:
        return [r for r in self.rules if r.is_phrasal]

    @property
    def non_phrasal_rules(self) -> list[Rule]:
        return [r for r in self.rules if not r.is_phrasal]

    @property
    def max_level(self) -> int:
        return max((r.level for r in self.rules), default=1)

    def entries_for(self, word: str) -> list[LexEntry]:
        return self.entries_by_surface.get(word, [])

    def fingerprint(self) -> str:
        return hashlib.sha1(serialize_grammar(self).encode()).hexdigest()[:12]


# ---------------------------------------------------------------------------
# DSL parsing
# ---------------------------------------------------------------------------

_NAME = r"[A-Za-z_][A-Za-z0-9_'-]*"
_CAT_RE = re.compile(rf"({_NAME})(?:\[([^\]]*)\])?")
_RULE_RE = re.compile(rf"rule\s+({_NAME})\s*:\s*(.+?)\s*->\s*(.+)$")
_LEX_RE = re.compile(rf'lex\s+"([^"]+)"\s*:\s*(\S+)\s+tag=(\S+)\s+sem=(\S+)\s*$')
_XFER_RE = re.compile(rf"xfer\s+({_NAME})\s*:\s*(.+?)\s*=>\s*(.+?)\s+level=(\d+)\s*$")


def _parse_value(text: str) -> Value:
    return Var(text) if text[0].isupper() else text


def _parse_features(text: str, line: int) -> FeatureTerm:
    text = text.strip()
    if not text:
        return EMPTY
    feats: dict[str, Value] = {}
    for part in text.split(","):
        if "=" not in part:
            raise GrammarError(f"malformed feature {part.strip()!r}", line)
        k, v = (s.strip() for s in part.split("=", 1))
        if not k or not v:
            raise GrammarError(f"malformed feature {part.strip()!r}", line)
        if k in feats:
            raise GrammarError(f"duplicate feature {k}", line)
        feats[k] = _parse_value(v)
    return FeatureTerm.of(feats)


def _parse_category(text: str, line: int) -> Category:
    m = _CAT_RE.fullmatch(text.strip())
    if not m:
        raise GrammarError(f"malformed category {text.strip()!r}", line)
    return Category(m.group(1), _parse_features(m.group(2) or "", line))


def _split_cats(text: str, line: int) -> list[Category]:
    # categories are whitespace-separated; feature brackets contain no spaces
    return [_parse_category(tok, line) for tok in text.split()]


def parse_pred_tree(text: str, line: int = 0) -> PredTree:
    """Parse a predicate-argument pattern like ``show(X, f(Y))``."""
    text = text.strip()
    pos = 0

    def error(msg):
        raise GrammarError(f"{msg} in pattern {text!r}", line)

    def skip_ws():
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def parse_node() -> PredTree:
        nonlocal pos
        skip_ws()
        if pos < len(text) and text[pos] == '"':
            end = text.find('"', pos + 1)
            if end < 0:
                error("unterminated quote")
            functor: Value = text[pos + 1:end]
            pos = end + 1
        else:
            m = re.match(_NAME, text[pos:])
            if not m:
                error("expected a functor")
            tok = m.group(0)
            pos += len(tok)
            functor = _parse_value(tok)
        skip_ws()
        args: list[PredTree] = []
        if pos < len(text) and text[pos] == "(":
            pos += 1
            while True:
                args.append(parse_node())
                skip_ws()
                if pos >= len(text):
                    error("unclosed parenthesis")
                if text[pos] == ",":
                    pos += 1
                    continue
                if text[pos] == ")":
                    pos += 1
                    break
                error(f"unexpected character {text[pos]!r}")
        return PredTree(functor, tuple(args))

    node = parse_node()
    skip_ws()
    if pos != len(text):
        error(f"trailing text {text[pos:]!r}")
    return node


def _parse_rule_tail(tokens: list[str], rid: str, line: int):
    kind, level, head, mood = None, None, 0, None
    for tok in tokens:
        if tok == PHRASAL:
            kind, level = PHRASAL, 1
        elif tok.startswith("level="):
            kind, level = NON_PHRASAL, int(tok[6:])
        elif tok.startswith("head="):
            head = int(tok[5:])
        elif tok.startswith("mood="):
            mood = tok[5:]
        else:
            raise GrammarError(f"unknown rule annotation {tok!r} in rule {rid}", line)
    if kind is None:
        raise GrammarError(f"rule {rid} needs 'phrasal' or 'level=<k>'", line)
    return kind, level, head, mood


def load_grammar(text: str) -> Grammar:
    """Parse a grammar DSL document; raises GrammarError with a line number."""
    categories: set[str] = set()
    tagset: set[str] = set()
    start: Optional[Category] = None
    rules: list[Rule] = []
    lexicon: list[LexEntry] = []
    xfers: list[TransferRule] = []
    rule_lines: dict[str, int] = {}
    macro_lines: list[tuple[int, str]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("categories:"):
            categories.update(line[len("categories:"):].split())
        elif line.startswith("tags:"):
            tagset.update(line[len("tags:"):].split())
        elif line.startswith("start:"):
            start = _parse_category(line[len("start:"):], lineno)
        elif line.startswith("rule"):
            m = _RULE_RE.match(line)
            if not m:
                raise GrammarError(f"malformed rule line {line!r}", lineno)
            rid, lhs_text, rest = m.groups()
            if rid in rule_lines:
                raise GrammarError(f"duplicate rule id {rid}", lineno)
            rule_lines[rid] = lineno
            toks = rest.split()
            annotations = (PHRASAL, "level=", "head=", "mood=")
            ncats = 0
            while ncats < len(toks) and not any(
                    toks[ncats] == a or toks[ncats].startswith(a) for a in annotations):
                ncats += 1
            if ncats == 0:
                raise GrammarError(f"rule {rid} has an empty right-hand side", lineno)
            rhs = [_parse_category(t, lineno) for t in toks[:ncats]]
            kind, level, head, mood = _parse_rule_tail(toks[ncats:], rid, lineno)
            try:
                rules.append(Rule(rid, _parse_category(lhs_text, lineno), tuple(rhs),
                                  kind, level, head, mood))
            except ValueError as exc:
                raise GrammarError(str(exc), lineno) from exc
            for cat in (rules[-1].lhs, *rules[-1].rhs):
                if cat.symbol not in categories:
                    raise GrammarError(f"undeclared category {cat.symbol}", lineno)
        elif line.startswith("lex"):
            m = _LEX_RE.match(line)
            if not m:
                raise GrammarError(f"malformed lexicon line {line!r}", lineno)
            surface, cat_text, tag, sem = m.groups()
            cat = _parse_category(cat_text, lineno)
            if cat.symbol not in categories:
                raise GrammarError(f"undeclared category {cat.symbol}", lineno)
            if tag not in tagset:
                raise GrammarError(f"undeclared tag {tag}", lineno)
            lexicon.append(LexEntry(surface, cat, tag, sem))
        elif line.startswith("xfer"):
            m = _XFER_RE.match(line)
            if not m:
                raise GrammarError(f"malformed transfer rule {line!r}", lineno)
            xid, src, tgt, level = m.groups()
            try:
                xfers.append(TransferRule(xid, parse_pred_tree(src, lineno),
                                          parse_pred_tree(tgt, lineno), int(level)))
            except ValueError as exc:
                raise GrammarError(str(exc), lineno) from exc
        elif line.startswith("macro"):
            macro_lines.append((lineno, line))  # consumed by ebl.load_specialized
        else:
            raise GrammarError(f"unrecognized line {line!r}", lineno)

    if start is None:
        raise GrammarError("missing 'start:' declaration")
    g = Grammar(rules, lexicon, categories, tagset, start, xfers)
    g.macro_lines = macro_lines  # raw; only meaningful for specialized files
    return g


def _fmt_features(ft: FeatureTerm) -> str:
    inner = ",".join(f"{k}={v.name if isinstance(v, Var) else v}" for k, v in ft.pairs)
    return f"[{inner}]"


def _fmt_category(cat: Category) -> str:
    return f"{cat.symbol}{_fmt_features(cat.features)}"


def format_pred_tree(t: PredTree) -> str:
    functor = t.functor.name if isinstance(t.functor, Var) else t.functor
    if isinstance(functor, str) and not re.fullmatch(_NAME, functor):
        functor = f'"{functor}"'
    if not t.args:
        return str(functor)
    return f"{functor}({', '.join(format_pred_tree(a) for a in t.args)})"


def serialize_grammar(g: Grammar) -> str:
    """Canonical DSL text; load(serialize(g)) is structurally identical to g."""
    out = [
        "categories: " + " ".join(sorted(g.categories)),
        "tags: " + " ".join(sorted(g.tagset)),
        "start: " + _fmt_category(g.start),
    ]
    for r in g.rules:
        tail = PHRASAL if r.is_phrasal else f"level={r.level}"
        parts = [f"rule {r.id}: {_fmt_category(r.lhs)} ->",
                 " ".join(_fmt_category(c) for c in r.rhs), tail, f"head={r.head}"]
        if r.mood:
            parts.append(f"mood={r.mood}")
        out.append(" ".join(parts))
    for e in g.lexicon:
        out.append(f'lex "{e.surface}": {_fmt_category(e.category)} tag={e.tag} sem={e.sem}')
    for x in g.transfer_rules:
        out.append(f"xfer {x.id}: {format_pred_tree(x.source)} => "
                   f"{format_pred_tree(x.target)} level={x.level}")
    return "\n".join(out) + "\n"
