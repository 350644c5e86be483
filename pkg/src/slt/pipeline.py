"""The staged parse: raw -> lexical -> phrasal -> full, pruning interleaved.

After each stage the stack decoder extracts the current best fragment
sequence, which is what the translation side consumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .chart import Chart, full_parse, lexical_pass, phrasal_pass
from .decoder import FragmentPath, ScoreConfig, best_sequence
from .ebl import SpecializedGrammar
from .grammar import Grammar
from .lattice import Lattice
from .pruner import PruneConfig, PruneModel, prune, score_fn_for


@dataclass
class ParseConfig:
    score: ScoreConfig = field(default_factory=ScoreConfig)
    prune: PruneConfig = field(default_factory=lambda: PruneConfig(0.0, 0.0))
    unknown_words: bool = True
    unk_tag: str = "UNK"
    max_constituents: int = 200000


@dataclass
class StageSnapshot:
    stage: str
    best: FragmentPath
    constituents: int

    def to_json(self) -> dict:
        return {
            "stage": self.stage,
            "score": self.best.total_score,
            "constituents": self.constituents,
            "fragments": [f.to_json() for f in self.best.fragments],
        }


@dataclass
class StageOutputs:
    stages: list[StageSnapshot]
    chart: Chart

    def stage(self, name: str) -> StageSnapshot:
        for s in self.stages:
            if s.stage == name:
                return s
        raise KeyError(name)

    def stage_fragments(self):
        return [(s.stage, s.best.fragments) for s in self.stages]

    def to_json(self) -> dict:
        return {"stages": [s.to_json() for s in self.stages]}


def parse_staged(lattice: Lattice, grammar: Grammar,
                 specialized: Optional[SpecializedGrammar] = None,
                 prune_model: Optional[PruneModel] = None,
                 config: ParseConfig = None) -> StageOutputs:
    """Run the four-stage parse, pausing after each stage to extract the
    current best fragment sequence."""
    config = config or ParseConfig()
    score_fn = score_fn_for(prune_model)

    def prune_now(chart: Chart, level: int):
        if prune_model is not None and level in config.prune.levels:
            prune(chart, prune_model, config.prune)

    chart = Chart(lattice)
    snapshots = [_snap("raw", chart, config)]

    lexical_pass(chart, grammar, config.unknown_words, config.unk_tag, score_fn)
    prune_now(chart, 1)
    snapshots.append(_snap("lexical", chart, config))

    phrasal_pass(chart, grammar, score_fn, config.max_constituents)
    prune_now(chart, 2)
    snapshots.append(_snap("phrasal", chart, config))

    target = specialized if specialized is not None else grammar
    hook = None
    if prune_model is not None:
        hook = lambda c, lvl: prune(c, prune_model, config.prune)
    # prune.levels holds constituent levels; rules at level L create
    # constituents at L+1, so shift the plan for the full-parse hook
    plan = frozenset(l - 1 for l in config.prune.levels if l >= 3)
    full_parse(chart, target, plan, score_fn, hook, config.max_constituents)
    snapshots.append(_snap("full", chart, config))

    return StageOutputs(snapshots, chart)


def _snap(stage: str, chart: Chart, config: ParseConfig) -> StageSnapshot:
    return StageSnapshot(stage, best_sequence(chart, config.score),
                         len(chart.constituents))
