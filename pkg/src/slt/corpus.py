"""Representative-subcorpus construction.

The recipe: split long utterances into translatable pieces, tag them with
the lexicon, group segments into classes by exact tag sequence, let a
human regroup where the automatic classes are off, designate a most
typical member per class, and emit the representatives ordered by class
size.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .grammar import Grammar

UNK_TAG = "UNK"


class CorpusError(Exception):
    pass


@dataclass
class SplitConfig:
    sentence_delimiters: frozenset[str] = frozenset({".", "?", "!", ";"})
    coordinators: frozenset[str] = frozenset({"and", "then"})
    verb_tags: frozenset[str] = frozenset({"VB", "VBZ", "VBP"})


@dataclass(frozen=True)
class Segment:
    utterance_id: str
    index: int
    words: tuple[str, ...]
    tags: tuple[str, ...]

    @property
    def ref(self) -> str:
        return f"{self.utterance_id}.{self.index}"

    @property
    def text(self) -> str:
        return " ".join(self.words)


@dataclass
class Utterance:
    id: str
    raw: str
    segments: list[Segment]

    @property
    def flagged_empty(self) -> bool:
        return not self.segments


class Tagger:
    """Lexicon-driven tagging: the most frequent tag per word, UNK fallback."""

    def __init__(self, grammar: Grammar):
        counts: dict[str, dict[str, int]] = {}
        for e in grammar.lexicon:
            counts.setdefault(e.surface, {}).setdefault(e.tag, 0)
            counts[e.surface][e.tag] += 1
        self._best = {w: max(tags.items(), key=lambda kv: (kv[1], kv[0]))[0]
                      for w, tags in counts.items()}

    def tag(self, word: str) -> str:
        return self._best.get(word, UNK_TAG)


def split_utterances(raw: Iterable[str], tagger: Tagger,
                     config: SplitConfig = SplitConfig()) -> list[Utterance]:
    """Split at sentence punctuation, and at a coordinator sitting between
    clause-initial verbs."""
    out = []
    for i, text in enumerate(raw):
        uid = f"u{i:04d}"
        words = text.split()
        pieces: list[list[str]] = []
        cur: list[str] = []
        for j, w in enumerate(words):
            stripped = w.rstrip("".join(config.sentence_delimiters))
            hard_break = stripped != w
            if (w in config.coordinators and cur
                    and tagger.tag(cur[0]) in config.verb_tags
                    and j + 1 < len(words)
                    and tagger.tag(words[j + 1]) in config.verb_tags):
                if cur:
                    pieces.append(cur)
                cur = []
                continue
            if stripped:
                cur.append(stripped)
            if hard_break and cur:
                pieces.append(cur)
                cur = []
        if cur:
            pieces.append(cur)
        segments = [
            Segment(uid, k, tuple(ws), tuple(tagger.tag(w) for w in ws))
            for k, ws in enumerate(pieces)]
        out.append(Utterance(uid, text, segments))
    return out


AUTO = "auto"
MANUAL = "manually-regrouped"


@dataclass
class TagSequenceClass:
    id: str
    tag_sequence: tuple[str, ...]
    members: list[Segment]
    representative: Optional[str] = None   # a member ref
    provenance: str = AUTO

    def member_by_ref(self, ref: str) -> Segment:
        for m in self.members:
            if m.ref == ref:
                return m
        raise CorpusError(f"no member {ref} in class {self.id}")


def group_by_tagsequence(utterances: Sequence[Utterance]) -> list[TagSequenceClass]:
    """Partition all segments into classes keyed by exact tag sequence."""
    classes: dict[tuple[str, ...], TagSequenceClass] = {}
    n = 0
    for u in utterances:
        for seg in u.segments:
            cls = classes.get(seg.tags)
            if cls is None:
                cls = TagSequenceClass(f"c{n:04d}", seg.tags, [])
                classes[seg.tags] = cls
                n += 1
            cls.members.append(seg)
    return list(classes.values())


# Edits: dicts so they deserialize straight off the service wire.
#   {"op": "move", "member": ref, "from": cid, "to": cid}
#   {"op": "split", "class": cid, "members": [refs], "new_id": cid?}
#   {"op": "merge", "classes": [cid, cid, ...], "into": cid}
#   {"op": "designate", "class": cid, "member": ref}

def regroup(classes: Sequence[TagSequenceClass], edits: Sequence[dict]) -> list[TagSequenceClass]:
    """Apply edits in order; the partition invariant is preserved throughout."""
    out = [TagSequenceClass(c.id, c.tag_sequence, list(c.members),
                            c.representative, c.provenance) for c in classes]
    by_id = {c.id: c for c in out}
    if len(by_id) != len(out):
        raise CorpusError("duplicate class ids")

    def need(cid: str) -> TagSequenceClass:
        if cid not in by_id:
            raise CorpusError(f"no such class {cid}")
        return by_id[cid]

    counter = len(out)
    for edit in edits:
        op = edit.get("op")
        if op == "move":
            src, dst = need(edit["from"]), need(edit["to"])
            seg = src.member_by_ref(edit["member"])
            src.members.remove(seg)
            if src.representative == seg.ref:
                src.representative = None
            dst.members.append(seg)
            src.provenance = dst.provenance = MANUAL
            if not src.members:
                out.remove(src)
                del by_id[src.id]
        elif op == "split":
            cls = need(edit["class"])
            refs = set(edit["members"])
            moving = [m for m in cls.members if m.ref in refs]
            if len(moving) != len(refs):
                raise CorpusError("split references members outside the class")
            if not moving or len(moving) == len(cls.members):
                raise CorpusError("split must leave both halves nonempty")
            cls.members = [m for m in cls.members if m.ref not in refs]
            if cls.representative in refs:
                cls.representative = None
            cls.provenance = MANUAL
            new_id = edit.get("new_id")
            if new_id is None:
                while f"c{counter:04d}" in by_id:
                    counter += 1
                new_id = f"c{counter:04d}"
            if new_id in by_id:
                raise CorpusError(f"class id {new_id} already exists")
            fresh = TagSequenceClass(new_id, cls.tag_sequence, moving, None, MANUAL)
            out.append(fresh)
            by_id[new_id] = fresh
        elif op == "merge":
            targets = [need(cid) for cid in edit["classes"]]
            into = need(edit["into"])
            for t in targets:
                if t is into:
                    continue
                into.members.extend(t.members)
                out.remove(t)
                del by_id[t.id]
            into.provenance = MANUAL
        elif op == "designate":
            cls = need(edit["class"])
            cls.member_by_ref(edit["member"])  # raises on a non-member
            cls.representative = edit["member"]
        else:
            raise CorpusError(f"unknown edit op {op!r}")
    return out


def check_partition(classes: Sequence[TagSequenceClass]) -> None:
    seen = set()
    for c in classes:
        for m in c.members:
            if m.ref in seen:
                raise CorpusError(f"segment {m.ref} appears in two classes")
            seen.add(m.ref)
        if c.representative is not None and all(m.ref != c.representative for m in c.members):
            raise CorpusError(f"class {c.id} representative is not a member")


@dataclass
class SubcorpusReport:
    rows: list[tuple[Segment, int]]      # (representative, class size)
    total_segments: int

    def coverage(self, top: int = 10) -> float:
        covered = sum(size for _, size in self.rows[:top])
        return covered / self.total_segments if self.total_segments else 0.0

    def to_tsv(self) -> str:
        return "\n".join(f"{size}\t{seg.text}" for seg, size in self.rows) + "\n"


def build_subcorpus(classes: Sequence[TagSequenceClass]) -> SubcorpusReport:
    """One representative per class, ordered by class size (ties by id).

    Classes without a designation default to the shortest member, ties
    broken lexicographically.
    """
    rows = []
    total = 0
    for c in sorted(classes, key=lambda c: (-len(c.members), c.id)):
        if not c.members:
            continue
        total += len(c.members)
        if c.representative is not None:
            seg = c.member_by_ref(c.representative)
        else:
            seg = min(c.members, key=lambda m: (len(m.words), m.text))
        rows.append((seg, len(c.members)))
    return SubcorpusReport(rows, total)


def classes_to_json(classes: Sequence[TagSequenceClass]) -> list[dict]:
    return [{
        "id": c.id,
        "tag_sequence": list(c.tag_sequence),
        "provenance": c.provenance,
        "representative": c.representative,
        "members": [{"ref": m.ref, "text": m.text, "tags": list(m.tags)}
                    for m in c.members],
    } for c in classes]
