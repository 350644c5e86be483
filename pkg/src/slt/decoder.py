"""Best-first extraction of the optimal fragment sequence spanning a chart.

Works over any chart-like object exposing ``vertex_count`` and
``decoder_edges()`` where edges carry ``frm``, ``to``, ``acoustic``,
``linguistic`` and ``level``.  An exact suffix potential (one backward
sweep over the DAG) makes the best-first search optimal, and makes
``n_best`` emit paths in true score order.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence


class DisconnectedChartError(Exception):
    pass


@dataclass(frozen=True)
class ScoreConfig:
    w_acoustic: float = 1.0
    w_linguistic: float = 1.0
    fragment_penalty: float = 1.0
    level_bonus: Optional[dict[int, float]] = None

    def bonus_for(self, level: int) -> float:
        if self.level_bonus is not None:
            return self.level_bonus.get(level, 0.0)
        # increasing in level but always below the fragment penalty, so a
        # single deep fragment beats any split of the same material
        return (1.0 - 1.0 / (level + 1)) * self.fragment_penalty

    def edge_score(self, e) -> float:
        return (self.w_acoustic * e.acoustic + self.w_linguistic * e.linguistic
                + self.bonus_for(e.level) - self.fragment_penalty)


@dataclass(frozen=True)
class FragmentPath:
    fragments: tuple
    total_score: float

    @property
    def spans(self) -> tuple[tuple[int, int], ...]:
        return tuple((f.frm, f.to) for f in self.fragments)

    def words(self) -> tuple[str, ...]:
        out = []
        for f in self.fragments:
            w = getattr(f, "words", None)
            if callable(w):
                w = w()
            out.extend(w if w is not None else ())
        return tuple(out)


@dataclass(frozen=True)
class GraphEdge:
    """Minimal decodable edge, mostly for tests and synthetic charts."""
    frm: int
    to: int
    acoustic: float = 0.0
    linguistic: float = 0.0
    level: int = 0


@dataclass
class Graph:
    vertex_count: int
    edges: list = field(default_factory=list)

    def decoder_edges(self):
        return list(self.edges)


def _prepare(chart, config: ScoreConfig):
    edges = list(chart.decoder_edges())
    n = chart.vertex_count
    by_from: dict[int, list[tuple[int, float, object]]] = {}
    for idx, e in enumerate(edges):
        by_from.setdefault(e.frm, []).append((idx, config.edge_score(e), e))
    suffix = [-math.inf] * n
    suffix[n - 1] = 0.0
    for v in range(n - 2, -1, -1):
        best = -math.inf
        for _, s, e in by_from.get(v, []):
            if suffix[e.to] > -math.inf:
                best = max(best, s + suffix[e.to])
        suffix[v] = best
    return by_from, suffix


def _search(chart, config: ScoreConfig, n: int):
    by_from, suffix = _prepare(chart, config)
    end = chart.vertex_count - 1
    if suffix[0] == -math.inf:
        raise DisconnectedChartError("no start-to-end fragment sequence exists")
    # heap entries: (-f, #fragments, spans, edge ids, vertex, g, fragments)
    heap = [(-suffix[0], 0, (), (), 0, 0.0, ())]
    found = []
    while heap and len(found) < n:
        neg_f, count, spans, ids, v, g, frags = heapq.heappop(heap)
        if v == end:
            found.append(FragmentPath(frags, g))
            continue
        for idx, s, e in by_from.get(v, []):
            if suffix[e.to] == -math.inf:
                continue
            g2 = g + s
            heapq.heappush(heap, (-(g2 + suffix[e.to]), count + 1,
                                  spans + ((e.frm, e.to),), ids + (idx,),
                                  e.to, g2, frags + (e,)))
    return found


def best_sequence(chart, config: ScoreConfig = ScoreConfig()) -> FragmentPath:
    """The maximum-score contiguous fragment sequence from start to end.

    Ties break toward fewer fragments, then the lexicographically smallest
    span list, then insertion order.
    """
    return _search(chart, config, 1)[0]


def n_best(chart, config: ScoreConfig = ScoreConfig(), n: int = 1) -> list[FragmentPath]:
    if n < 1:
        raise ValueError("n must be >= 1")
    return _search(chart, config, n)
