"""Word lattices: linear text input and n-best hypothesis conflation.

A lattice is a DAG over integer vertices 0..k-1 with word edges running
strictly forward.  Conflation aligns each hypothesis against the current
lattice's best-matching path (Levenshtein, with match > substitution >
insertion > deletion tie-breaking) and threads new edges for the parts
that differ, so every input string stays readable as a start-to-end path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence


class LatticeError(Exception):
    pass


@dataclass(frozen=True)
class LatticeEdge:
    frm: int
    to: int
    word: str
    acoustic: float = 0.0


@dataclass(frozen=True)
class Lattice:
    vertex_count: int
    edges: tuple[LatticeEdge, ...]

    def __post_init__(self):
        if self.vertex_count < 2:
            raise LatticeError("a lattice needs at least two vertices")
        seen = set()
        for e in self.edges:
            if not 0 <= e.frm < e.to < self.vertex_count:
                raise LatticeError(f"edge {e} is not strictly forward")
            if not e.word:
                raise LatticeError("empty word on a lattice edge")
            key = (e.frm, e.to, e.word)
            if key in seen:
                raise LatticeError(f"duplicate edge {key}")
            seen.add(key)
        if not any(True for _ in self.paths(limit=1)):
            raise LatticeError("no start-to-end path")

    @property
    def start(self) -> int:
        return 0

    @property
    def end(self) -> int:
        return self.vertex_count - 1

    def edges_from(self, v: int) -> list[LatticeEdge]:
        return [e for e in self.edges if e.frm == v]

    def paths(self, limit: int = 100000) -> Iterator[tuple[LatticeEdge, ...]]:
        """Enumerate start-to-end paths depth-first (deterministic order)."""
        by_from: dict[int, list[LatticeEdge]] = {}
        for e in self.edges:
            by_from.setdefault(e.frm, []).append(e)
        for v in by_from:
            by_from[v].sort(key=lambda e: (e.to, e.word))
        count = 0
        stack: list[tuple[int, tuple[LatticeEdge, ...]]] = [(0, ())]
        while stack:
            v, prefix = stack.pop()
            if v == self.end:
                yield prefix
                count += 1
                if count >= limit:
                    return
                continue
            for e in reversed(by_from.get(v, [])):
                stack.append((e.to, prefix + (e,)))

    def path_words(self, limit: int = 100000) -> set[tuple[str, ...]]:
        return {tuple(e.word for e in p) for p in self.paths(limit)}

    def to_json(self) -> str:
        return json.dumps({
            "vertices": self.vertex_count,
            "edges": [{"from": e.frm, "to": e.to, "word": e.word, "acoustic": e.acoustic}
                      for e in self.edges],
        })

    @staticmethod
    def from_json(text: str) -> "Lattice":
        obj = json.loads(text)
        return Lattice(obj["vertices"], tuple(
            LatticeEdge(d["from"], d["to"], d["word"], float(d.get("acoustic", 0.0)))
            for d in obj["edges"]))


def linear_lattice(text: str, default_score: float = 0.0) -> Lattice:
    """n words become n+1 vertices and n edges, each with default_score."""
    words = text.split()
    if not words:
        raise LatticeError("empty input")
    edges = tuple(LatticeEdge(i, i + 1, w, default_score) for i, w in enumerate(words))
    return Lattice(len(words) + 1, edges)


def load_nbest(text: str) -> list[tuple[str, float]]:
    """Parse an n-best file: lines of '<score>\\t<sentence>'."""
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            score, sentence = line.split("\t", 1)
            out.append((sentence.strip(), float(score)))
        except ValueError as exc:
            raise LatticeError(f"malformed n-best line {lineno}: {line!r}") from exc
    return out


# ---------------------------------------------------------------------------
# Conflation
# ---------------------------------------------------------------------------

# Internal mutable edge over symbolic vertex ids, renumbered at the end.
@dataclass
class _Edge:
    frm: int
    to: int
    word: str
    score: float


def _align(hyp: Sequence[str], path: Sequence[str]) -> list[tuple[str, int, int]]:
    """Levenshtein alignment of hyp against path.

    Returns ops as (kind, hyp_index, path_index) with kind in
    match/substitute/insert/delete.  Prefers match > substitution >
    insertion > deletion, leftmost among equals.
    """
    n, m = len(hyp), len(path)
    INF = 10 ** 9
    cost = [[INF] * (m + 1) for _ in range(n + 1)]
    back: list[list[str]] = [[""] * (m + 1) for _ in range(n + 1)]
    cost[0][0] = 0
    for i in range(n + 1):
        for j in range(m + 1):
            if i < n and j < m:
                step = 0 if hyp[i] == path[j] else 1
                kind = "match" if step == 0 else "substitute"
                if cost[i][j] + step < cost[i + 1][j + 1]:
                    cost[i + 1][j + 1] = cost[i][j] + step
                    back[i + 1][j + 1] = kind
            if i < n and cost[i][j] + 1 < cost[i + 1][j]:
                cost[i + 1][j] = cost[i][j] + 1
                back[i + 1][j] = "insert"
            if j < m and cost[i][j] + 1 < cost[i][j + 1]:
                cost[i][j + 1] = cost[i][j] + 1
                back[i][j + 1] = "delete"
    ops: list[tuple[str, int, int]] = []
    i, j = n, m
    while i or j:
        kind = back[i][j]
        if kind in ("match", "substitute"):
            i, j = i - 1, j - 1
            ops.append((kind, i, j))
        elif kind == "insert":
            i -= 1
            ops.append((kind, i, -1))
        else:
            j -= 1
            ops.append((kind, -1, j))
    ops.reverse()
    return ops


def conflate_nbest(hypotheses: Sequence[tuple[str, float]], n_max: int = 5) -> Lattice:
    """Align and conflate the top hypothesis strings into one lattice.

    Each hypothesis's total score is divided equally among its words; an
    edge shared by several hypotheses takes the maximum share.
    """
    if not hypotheses:
        raise LatticeError("empty hypothesis list")
    if len(hypotheses) > n_max:
        raise LatticeError(f"more than n_max={n_max} hypotheses")

    tokenized = []
    for sentence, total in hypotheses:
        words = sentence.split()
        if not words:
            raise LatticeError("empty hypothesis string")
        tokenized.append((words, total / len(words)))

    first_words, first_share = tokenized[0]
    next_vertex = len(first_words) + 1
    end_vertex = len(first_words)
    edges: list[_Edge] = [
        _Edge(i, i + 1, w, first_share) for i, w in enumerate(first_words)]

    def all_paths() -> list[list[_Edge]]:
        by_from: dict[int, list[_Edge]] = {}
        for e in edges:
            by_from.setdefault(e.frm, []).append(e)
        for v in by_from:
            by_from[v].sort(key=lambda e: (e.to, e.word))
        out: list[list[_Edge]] = []
        stack: list[tuple[int, list[_Edge]]] = [(0, [])]
        while stack and len(out) < 20000:
            v, prefix = stack.pop()
            if v == end_vertex:
                out.append(prefix)
                continue
            for e in reversed(by_from.get(v, [])):
                stack.append((e.to, prefix + [e]))
        return out

    for words, share in tokenized[1:]:
        paths = all_paths()
        best_path, best_cost = None, None
        for p in paths:
            ops = _align(words, [e.word for e in p])
            c = sum(1 for k, _, _ in ops if k != "match")
            if best_cost is None or c < best_cost:
                best_path, best_cost = p, c
        assert best_path is not None
        ops = _align(words, [e.word for e in best_path])
        # the op consuming the final hypothesis word must land on the end vertex
        last_hyp = max(i for i, (k, _, _) in enumerate(ops) if k != "delete")
        cur = 0
        pending: list[str] = []

        def chain(ws: list[str], target: int | None):
            # thread words through fresh vertices; the last one lands on
            # target when given.
            nonlocal cur, next_vertex
            for k, w in enumerate(ws):
                if k == len(ws) - 1 and target is not None:
                    _add_edge(edges, cur, target, w, share)
                    cur = target
                else:
                    _add_edge(edges, cur, next_vertex, w, share)
                    cur = next_vertex
                    next_vertex += 1

        for idx, (kind, hi, pi) in enumerate(ops):
            if kind == "delete":
                continue  # hypothesis skips this path edge; bridged by next op
            final = idx == last_hyp
            if kind == "insert":
                if final:
                    chain(pending + [words[hi]], end_vertex)
                    pending = []
                else:
                    pending.append(words[hi])
                continue
            edge = best_path[pi]
            if pending:
                chain(pending, edge.frm if cur != edge.frm else None)
                pending = []
            if final:
                target = end_vertex
            elif edge.to == end_vertex:
                # hypothesis continues past the last path edge: detour so the
                # trailing words can still land on the end vertex
                target = next_vertex
                next_vertex += 1
            else:
                target = edge.to
            if kind == "match" and cur == edge.frm and target == edge.to:
                edge.score = max(edge.score, share)
                cur = edge.to
            else:
                _add_edge(edges, cur, target, words[hi], share)
                cur = target
        if cur != end_vertex:
            raise LatticeError("alignment did not reach the end vertex")

    return _renumber(edges, end_vertex)


def _add_edge(edges: list[_Edge], frm: int, to: int, word: str, score: float):
    for e in edges:
        if e.frm == frm and e.to == to and e.word == word:
            e.score = max(e.score, score)
            return
    edges.append(_Edge(frm, to, word, score))


def _renumber(edges: Iterable[_Edge], end_vertex: int) -> Lattice:
    """Topologically renumber symbolic vertices so edges run forward."""
    edges = list(edges)
    verts = {0, end_vertex} | {e.frm for e in edges} | {e.to for e in edges}
    succ: dict[int, set[int]] = {v: set() for v in verts}
    indeg: dict[int, int] = {v: 0 for v in verts}
    for e in edges:
        if e.to not in succ[e.frm]:
            succ[e.frm].add(e.to)
            indeg[e.to] += 1
    order: list[int] = []
    ready = sorted(v for v in verts if indeg[v] == 0)
    while ready:
        # keep the end vertex last; otherwise smallest symbolic id first
        ready.sort(key=lambda v: (v == end_vertex, v))
        v = ready.pop(0)
        order.append(v)
        for w in sorted(succ[v]):
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
    if len(order) != len(verts):
        raise LatticeError("conflation produced a cycle")
    number = {v: i for i, v in enumerate(order)}
    out = tuple(sorted(
        (LatticeEdge(number[e.frm], number[e.to], e.word, e.score) for e in edges),
        key=lambda e: (e.frm, e.to, e.word)))
    return Lattice(len(verts), out)
