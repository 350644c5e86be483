"""Discriminant statistics: extraction, supervised training, and pruning.

A discriminant is an abbreviated description of a constituent (its
category over its words) or of a neighbour pair (the neighbour's tag next
to the constituent's category).  Training counts how often each
discriminant was created during parsing versus how often its constituent
survived into an approved analysis; pruning removes constituents whose
smoothed success ratio falls below threshold, unless removal would
disconnect the chart.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Optional, Sequence

from .chart import Chart, Constituent, full_parse, lexical_pass, phrasal_pass, subtrees
from .grammar import Grammar
from .lattice import linear_lattice

if TYPE_CHECKING:  # pragma: no cover
    from .treebanker import TreebankEntry

log = logging.getLogger(__name__)

CONSTITUENT = "constituent"
PAIR = "pair"
TRIPLE = "triple"
MOOD = "mood"

USER = "user"
SYSTEM = "system"
BOTH = "both"

_FRIENDLINESS = {CONSTITUENT: BOTH, PAIR: SYSTEM, TRIPLE: USER, MOOD: USER}


@dataclass(frozen=True)
class Discriminant:
    kind: str
    key: str

    @property
    def friendliness(self) -> str:
        return _FRIENDLINESS[self.kind]

    @property
    def full_key(self) -> str:
        return f"{self.kind}:{self.key}"


def constituent_discriminant(c: Constituent) -> Discriminant:
    return Discriminant(CONSTITUENT, f"{c.symbol}:{' '.join(c.words)}")


def extract_discriminants(c: Constituent, left: Sequence[Constituent] = (),
                          right: Sequence[Constituent] = ()) -> list[Discriminant]:
    """One constituent discriminant plus one pair per distinct neighbour tag."""
    out = [constituent_discriminant(c)]
    for tag in sorted({n.tag for n in left}):
        out.append(Discriminant(PAIR, f"{tag}+{c.symbol}"))
    for tag in sorted({n.tag for n in right}):
        out.append(Discriminant(PAIR, f"{c.symbol}+{tag}"))
    return out


def chart_discriminants(chart: Chart) -> list[tuple[Constituent, Discriminant]]:
    """Every (constituent, discriminant) instance over the current chart."""
    out = []
    for c in chart.constituents:
        for d in extract_discriminants(c, chart.ending_at(c.frm), chart.starting_at(c.to)):
            out.append((c, d))
    return out


@dataclass
class DiscriminantStats:
    created: int = 0
    successes: int = 0

    def __post_init__(self):
        if self.successes > self.created or min(self.created, self.successes) < 0:
            raise ValueError("need 0 <= successes <= created")


@dataclass
class PruneModel:
    stats: dict[str, DiscriminantStats] = field(default_factory=dict)
    alpha: float = 0.5
    corpus_id: str = ""
    skipped: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")

    def smoothed(self, d: Discriminant) -> float:
        s = self.stats.get(d.full_key)
        if s is None:
            return 0.5  # alpha / (2 * alpha): unseen discriminants stay safe
        return (s.successes + self.alpha) / (s.created + 2 * self.alpha)

    def log_success(self, d: Discriminant) -> float:
        return math.log(self.smoothed(d))

    def record(self, d: Discriminant, success: bool):
        s = self.stats.setdefault(d.full_key, DiscriminantStats())
        s.created += 1
        if success:
            s.successes += 1

    def merge(self, other: "PruneModel") -> "PruneModel":
        """Additively merge counts from a model trained on another shard."""
        if other.alpha != self.alpha:
            raise ValueError("cannot merge models with different smoothing")
        for key, stats in other.stats.items():
            mine = self.stats.setdefault(key, DiscriminantStats())
            mine.created += stats.created
            mine.successes += stats.successes
        self.skipped.extend(other.skipped)
        return self

    def save(self, path: str):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"alpha": self.alpha, "corpus_id": self.corpus_id}) + "\n")
            for key in sorted(self.stats):
                kind, _, rest = key.partition(":")
                s = self.stats[key]
                fh.write(json.dumps({"key": rest, "kind": kind,
                                     "created": s.created, "successes": s.successes}) + "\n")

    @staticmethod
    def load(path: str) -> "PruneModel":
        with open(path, encoding="utf-8") as fh:
            lines = [json.loads(l) for l in fh if l.strip()]
        if not lines or "alpha" not in lines[0]:
            raise ValueError(f"{path}: missing model header record")
        model = PruneModel(alpha=lines[0]["alpha"], corpus_id=lines[0].get("corpus_id", ""))
        for rec in lines[1:]:
            model.stats[f"{rec['kind']}:{rec['key']}"] = DiscriminantStats(
                rec["created"], rec["successes"])
        return model


@dataclass(frozen=True)
class PruneConfig:
    theta_own: float = 0.02
    theta_pair: float = 0.02
    levels: frozenset[int] = frozenset({1, 2})

    def __post_init__(self):
        for name, v in (("theta_own", self.theta_own), ("theta_pair", self.theta_pair)):
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name} must be in [0, 1); 0 disables pruning")

    @property
    def disabled(self) -> bool:
        return self.theta_own == 0.0 and self.theta_pair == 0.0


def score_fn_for(model: Optional[PruneModel]):
    """Linguistic-score hook for the chart passes: log success ratio of the
    constituent's own discriminant."""
    if model is None:
        return None
    return lambda c: model.log_success(constituent_discriminant(c))


def train(treebank: Iterable["TreebankEntry"], grammar: Grammar,
          alpha: float = 0.5, corpus_id: str = "") -> PruneModel:
    """Count discriminant creations and successes by re-parsing each entry.

    A discriminant instance succeeds when its constituent's derivation
    occurs as a subtree of one of the entry's approved analyses.  Entries
    whose approved analyses the grammar cannot reproduce are skipped and
    reported on the returned model.
    """
    model = PruneModel(alpha=alpha, corpus_id=corpus_id)
    for entry in treebank:
        if not entry.approved:
            raise ValueError(f"treebank entry {entry.id} has no approved analysis")
        chart = Chart(linear_lattice(" ".join(entry.words)))
        lexical_pass(chart, grammar)
        phrasal_pass(chart, grammar)
        full_parse(chart, grammar)
        derivations = {c.derivation for c in chart.constituents}
        if not all(d in derivations for d in entry.approved):
            log.warning("treebank entry %s: approved analysis not reproducible; skipped",
                        entry.id)
            model.skipped.append(entry.id)
            continue
        approved_subtrees = set()
        for d in entry.approved:
            approved_subtrees.update(subtrees(d))
        for c, disc in chart_discriminants(chart):
            model.record(disc, c.derivation in approved_subtrees)
    return model


def prune(chart: Chart, model: PruneModel, config: PruneConfig) -> Chart:
    """Remove unpromising constituents while preserving connectivity.

    A constituent is a candidate when its own smoothed score is below
    theta_own, or when it has neighbour pairs and every one of them scores
    below theta_pair.  Candidates go in ascending score order; a removal
    that would break start-to-end reachability is skipped.
    """
    if config.disabled:
        return chart
    candidates = []
    for c in chart.constituents:
        own = model.smoothed(constituent_discriminant(c))
        pair_scores = [model.smoothed(d) for d in
                       extract_discriminants(c, chart.ending_at(c.frm),
                                             chart.starting_at(c.to))[1:]]
        is_candidate = own < config.theta_own or (
            bool(pair_scores) and all(p < config.theta_pair for p in pair_scores))
        if is_candidate:
            candidates.append((own, c.frm, c.to, c.symbol, chart.index_of(c), c))
    candidates.sort(key=lambda t: t[:5])
    removed: set = set()
    doomed: list[Constituent] = []
    for *_, c in candidates:
        trial = frozenset(removed | {c.key()})
        if chart.is_connected(excluding=trial):
            removed.add(c.key())
            doomed.append(c)
    chart.remove(doomed)
    return chart


def prune_hook(model: PruneModel, config: PruneConfig):
    """Adapter for chart.full_parse's per-level hook."""
    return lambda chart, level: prune(chart, model, config)
