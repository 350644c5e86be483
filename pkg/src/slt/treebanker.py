"""Interactive disambiguation: discriminants, judgments, and propagation.

For each ambiguous sentence we hold an incidence matrix relating
discriminants to the analyses they hold in.  A user marks any discriminant
correct or incorrect; the remaining-analysis set shrinks accordingly, and
every undecided discriminant that the surviving set now settles is decided
automatically.  Resolved sentences export as supervised training data.

The store is an append-only JSON-lines log; replaying it reconstructs all
session states exactly, which is the crash-recovery story.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .chart import (Chart, Derivation, RuleNode, derivation_from_json,
                    derivation_to_json, derivation_words, subtrees)
from .grammar import Grammar
from .pruner import CONSTITUENT, MOOD, TRIPLE, Discriminant
from .translator import analysis_tree, derivation_mood, semantic_triples


class TreebankError(Exception):
    pass


class JudgmentConflict(TreebankError):
    """Judging an already-decided discriminant, or a stale view."""


OPEN = "open"
RESOLVED_UNIQUE = "resolved-unique"
RESOLVED_SET = "resolved-set"
CONTRADICTION = "contradiction"

CORRECT = "correct"
INCORRECT = "incorrect"

USER_SOURCE = "user"
PROPAGATED = "propagated"


@dataclass(frozen=True)
class MatrixRow:
    discriminant: Discriminant
    span_length: int
    holds_in: frozenset[int]       # analysis indexes


@dataclass
class IncidenceMatrix:
    analyses: list[Derivation]
    rows: list[MatrixRow]

    def row(self, full_key: str) -> MatrixRow:
        for r in self.rows:
            if r.discriminant.full_key == full_key:
                return r
        raise TreebankError(f"no such discriminant {full_key!r}")

    def to_json(self) -> dict:
        return {
            "analyses": [derivation_to_json(d) for d in self.analyses],
            "rows": [{"kind": r.discriminant.kind, "key": r.discriminant.key,
                      "span": r.span_length, "holds": sorted(r.holds_in)}
                     for r in self.rows],
        }

    @staticmethod
    def from_json(obj: dict) -> "IncidenceMatrix":
        return IncidenceMatrix(
            [derivation_from_json(d) for d in obj["analyses"]],
            [MatrixRow(Discriminant(r["kind"], r["key"]), r["span"],
                       frozenset(r["holds"])) for r in obj["rows"]])


def analysis_discriminants(d: Derivation, grammar: Grammar,
                           specialized=None) -> list[tuple[Discriminant, int]]:
    """User-facing discriminants of one analysis, with their span lengths."""
    out: list[tuple[Discriminant, int]] = []
    seen = set()
    for node in subtrees(d):
        if isinstance(node, RuleNode) and node.rule_id is not None:
            words = derivation_words(node)
            disc = Discriminant(CONSTITUENT, f"{node.symbol}:{' '.join(words)}")
            if disc not in seen:
                seen.add(disc)
                out.append((disc, len(words)))
    tree = analysis_tree(d, grammar, specialized)
    sentence_len = len(derivation_words(d))
    for triple in semantic_triples(tree):
        disc = Discriminant(TRIPLE, triple)
        if disc not in seen:
            seen.add(disc)
            out.append((disc, len(triple.split("+"))))
    mood = Discriminant(MOOD, derivation_mood(d, grammar, specialized))
    if mood not in seen:
        out.append((mood, sentence_len))
    return out


def build_incidence(analyses: Sequence[Derivation], grammar: Grammar,
                    specialized=None) -> IncidenceMatrix:
    """Extract constituent, triple, and mood discriminants from every
    analysis, keeping only those that discriminate."""
    if not analyses:
        raise TreebankError("need at least one analysis")
    holds: dict[Discriminant, set[int]] = {}
    spans: dict[Discriminant, int] = {}
    for i, d in enumerate(analyses):
        for disc, span in analysis_discriminants(d, grammar, specialized):
            holds.setdefault(disc, set()).add(i)
            spans[disc] = max(spans.get(disc, 0), span)
    n = len(analyses)
    rows = [MatrixRow(disc, spans[disc], frozenset(ix))
            for disc, ix in holds.items() if 0 < len(ix) < n]
    friendly_rank = {"both": 0, "user": 0, "system": 1}
    rows.sort(key=lambda r: (friendly_rank[r.discriminant.friendliness],
                             -r.span_length, r.discriminant.full_key))
    return IncidenceMatrix(list(analyses), rows)


@dataclass(frozen=True)
class Judgment:
    full_key: str
    verdict: str
    source: str
    timestamp: float


@dataclass
class SessionState:
    matrix: IncidenceMatrix
    judgments: list[Judgment] = field(default_factory=list)
    remaining: frozenset[int] = None
    status: str = OPEN
    approved: Optional[list[int]] = None

    def __post_init__(self):
        if self.remaining is None:
            self.recompute()

    @property
    def user_judgments(self) -> list[Judgment]:
        return [j for j in self.judgments if j.source == USER_SOURCE]

    def verdict_for(self, full_key: str) -> Optional[Judgment]:
        for j in self.judgments:
            if j.full_key == full_key:
                return j
        return None

    def recompute(self):
        """Recompute remaining and propagated verdicts from user judgments."""
        remaining = set(range(len(self.matrix.analyses)))
        users = self.user_judgments
        for j in users:
            row = self.matrix.row(j.full_key)
            if j.verdict == CORRECT:
                remaining &= row.holds_in
            else:
                remaining -= row.holds_in
        judgments = list(users)
        decided = {j.full_key for j in judgments}
        changed = True
        while changed:
            changed = False
            for row in self.matrix.rows:
                key = row.discriminant.full_key
                if key in decided:
                    continue
                if remaining and row.holds_in >= remaining:
                    judgments.append(Judgment(key, CORRECT, PROPAGATED,
                                              users[-1].timestamp if users else 0.0))
                elif remaining and not (row.holds_in & remaining):
                    judgments.append(Judgment(key, INCORRECT, PROPAGATED,
                                              users[-1].timestamp if users else 0.0))
                else:
                    continue
                decided.add(key)
                changed = True
        self.judgments = judgments
        self.remaining = frozenset(remaining)
        if not remaining:
            self.status = CONTRADICTION
        elif len(remaining) == 1:
            self.status = RESOLVED_UNIQUE
        elif all(r.discriminant.full_key in decided for r in self.matrix.rows):
            self.status = RESOLVED_SET
        else:
            self.status = OPEN

    def to_json(self) -> dict:
        return {
            "remaining": sorted(self.remaining),
            "status": self.status,
            "approved": self.approved,
            "judgments": [{"key": j.full_key, "verdict": j.verdict,
                           "source": j.source, "ts": j.timestamp}
                          for j in self.judgments],
        }


def apply_judgment(state: SessionState, full_key: str, verdict: str,
                   timestamp: float = 0.0) -> SessionState:
    """Record a user judgment and propagate its consequences to fixpoint.

    A discriminant the user already judged cannot be judged again.  One the
    TreeBanker decided by propagation may be overridden: the user verdict
    replaces the propagated one, which is how a contradiction can arise.
    """
    if verdict not in (CORRECT, INCORRECT):
        raise TreebankError(f"verdict must be correct or incorrect, not {verdict!r}")
    state.matrix.row(full_key)  # raises on unknown key
    existing = state.verdict_for(full_key)
    if existing is not None and existing.source == USER_SOURCE:
        raise JudgmentConflict(f"{full_key} is already decided ({existing.verdict})")
    state.judgments.append(Judgment(full_key, verdict, USER_SOURCE, timestamp))
    state.recompute()
    return state


def undo_judgment(state: SessionState) -> SessionState:
    """Pop the most recent user judgment and recompute everything."""
    users = state.user_judgments
    if not users:
        raise TreebankError("nothing to undo")
    last = users[-1]
    state.judgments = [j for j in state.judgments
                       if j.source == USER_SOURCE and j is not last]
    state.approved = None
    state.recompute()
    return state


UNIQUE_REQUIRED = "unique-required"
ACCEPT_SET = "accept-set"


def resolve(state: SessionState, mode: str) -> list[int]:
    """Approve the remaining analyses; unique-required demands exactly one."""
    if state.status == CONTRADICTION:
        raise TreebankError("cannot resolve a contradictory session")
    if mode == UNIQUE_REQUIRED:
        if len(state.remaining) != 1:
            raise TreebankError("unresolved: more than one analysis remains")
    elif mode == ACCEPT_SET:
        if not state.remaining:
            raise TreebankError("cannot accept an empty analysis set")
    else:
        raise TreebankError(f"unknown resolve mode {mode!r}")
    state.approved = sorted(state.remaining)
    if state.status == OPEN:
        state.status = RESOLVED_SET if len(state.approved) > 1 else RESOLVED_UNIQUE
    return state.approved


# ---------------------------------------------------------------------------
# Training-data export
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TreebankEntry:
    id: str
    words: tuple[str, ...]
    approved: tuple[Derivation, ...]
    verdicts: tuple[tuple[str, str], ...] = ()

    def to_json(self) -> dict:
        return {"id": self.id, "words": list(self.words),
                "approved": [derivation_to_json(d) for d in self.approved],
                "verdicts": [list(v) for v in self.verdicts]}

    @staticmethod
    def from_json(obj: dict) -> "TreebankEntry":
        return TreebankEntry(
            obj["id"], tuple(obj["words"]),
            tuple(derivation_from_json(d) for d in obj["approved"]),
            tuple((k, v) for k, v in obj.get("verdicts", ())))


def save_treebank(entries: Iterable[TreebankEntry], path: str):
    with open(path, "w", encoding="utf-8") as fh:
        for e in entries:
            fh.write(json.dumps(e.to_json()) + "\n")


def load_treebank(path: str) -> list[TreebankEntry]:
    with open(path, encoding="utf-8") as fh:
        return [TreebankEntry.from_json(json.loads(l)) for l in fh if l.strip()]


# ---------------------------------------------------------------------------
# Persistent store
# ---------------------------------------------------------------------------

SCHEMA_VERSION = 1


@dataclass
class Session:
    sentence_id: str
    text: str
    state: SessionState


class TreebankStore:
    """Sentence sessions backed by an append-only judgment log.

    Every mutation is written to the log before it is acknowledged;
    replaying the log rebuilds identical session states.  Mutations carry
    client request ids for at-most-once semantics.
    """

    def __init__(self, log_path: str):
        self.log_path = log_path
        self.sessions: dict[str, Session] = {}
        self._seen_requests: set[str] = set()
        if os.path.exists(log_path):
            with open(log_path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        self._apply(json.loads(line), replaying=True)

    def _append(self, record: dict):
        record["v"] = SCHEMA_VERSION
        with open(self.log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def _apply(self, record: dict, replaying: bool = False):
        kind = record["event"]
        rid = record.get("request_id")
        if rid is not None:
            if rid in self._seen_requests:
                return
            self._seen_requests.add(rid)
        if kind == "register":
            matrix = IncidenceMatrix.from_json(record["matrix"])
            self.sessions[record["sentence"]] = Session(
                record["sentence"], record["text"], SessionState(matrix))
        elif kind == "judge":
            session = self.sessions[record["sentence"]]
            apply_judgment(session.state, record["key"], record["verdict"],
                           record.get("ts", 0.0))
        elif kind == "undo":
            undo_judgment(self.sessions[record["sentence"]].state)
        elif kind == "resolve":
            resolve(self.sessions[record["sentence"]].state, record["mode"])
        else:
            raise TreebankError(f"unknown log event {kind!r}")

    # -- mutations (logged before acknowledgement) --------------------------

    def register(self, sentence_id: str, text: str, matrix: IncidenceMatrix):
        if sentence_id in self.sessions:
            raise TreebankError(f"sentence {sentence_id} already registered")
        record = {"event": "register", "sentence": sentence_id, "text": text,
                  "matrix": matrix.to_json()}
        self._append(record)
        self._apply(record)

    def judge(self, sentence_id: str, full_key: str, verdict: str,
              timestamp: float = 0.0, request_id: Optional[str] = None) -> SessionState:
        session = self._session(sentence_id)
        if request_id is not None and request_id in self._seen_requests:
            return session.state
        # validate before logging so the log never contains a bad mutation
        probe = state_snapshot(session.state)
        apply_judgment(probe, full_key, verdict, timestamp)
        record = {"event": "judge", "sentence": sentence_id, "key": full_key,
                  "verdict": verdict, "ts": timestamp, "request_id": request_id}
        self._append(record)
        self._apply(record)
        return session.state

    def undo(self, sentence_id: str, request_id: Optional[str] = None) -> SessionState:
        session = self._session(sentence_id)
        if request_id is not None and request_id in self._seen_requests:
            return session.state
        if not session.state.user_judgments:
            raise TreebankError("nothing to undo")
        record = {"event": "undo", "sentence": sentence_id, "request_id": request_id}
        self._append(record)
        self._apply(record)
        return session.state

    def resolve(self, sentence_id: str, mode: str,
                request_id: Optional[str] = None) -> list[int]:
        session = self._session(sentence_id)
        if request_id is not None and request_id in self._seen_requests:
            return session.state.approved or []
        probe = state_snapshot(session.state)
        resolve(probe, mode)
        record = {"event": "resolve", "sentence": sentence_id, "mode": mode,
                  "request_id": request_id}
        self._append(record)
        self._apply(record)
        return session.state.approved or []

    # -- queries -------------------------------------------------------------

    def _session(self, sentence_id: str) -> Session:
        if sentence_id not in self.sessions:
            raise TreebankError(f"unknown sentence {sentence_id}")
        return self.sessions[sentence_id]

    def get(self, sentence_id: str) -> Session:
        return self._session(sentence_id)

    def resolved_sessions(self) -> list[Session]:
        return [s for s in self.sessions.values() if s.state.approved]

    def export_training_data(self) -> list[TreebankEntry]:
        """One record per resolved sentence: approved analyses plus the full
        discriminant verdicts."""
        out = []
        for s in self.resolved_sessions():
            approved = tuple(s.state.matrix.analyses[i] for i in s.state.approved)
            verdicts = tuple((j.full_key, j.verdict) for j in s.state.judgments)
            out.append(TreebankEntry(s.sentence_id, tuple(s.text.split()),
                                     approved, verdicts))
        return out


def state_snapshot(state: SessionState) -> SessionState:
    """Deep-enough copy for validating a mutation before logging it."""
    clone = SessionState(state.matrix, list(state.judgments), state.remaining,
                         state.status, list(state.approved) if state.approved else None)
    return clone
