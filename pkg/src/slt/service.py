"""HTTP facade over parsing, translation, corpus editing, and treebanking.

All mutations are durably logged before they are acknowledged; sessions
and corpus classes rebuild from their logs on startup.  Writes to one
sentence's session (or to the class store) are serialized by locks, so
concurrent annotators cannot interleave conflicting judgments.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import corpus as corpus_mod
from . import ebl, pruner, treebanker
from .chart import derivation_to_json
from .grammar import Grammar, load_grammar
from .lattice import Lattice, linear_lattice
from .pipeline import ParseConfig, parse_staged
from .translator import (LexPreference, TranslationResources, anytime_translate,
                         load_bilingual)


class ServiceError(Exception):
    def __init__(self, code: str, message: str, status: int = 422, detail=None):
        self.code = code
        self.message = message
        self.status = status
        self.detail = detail
        super().__init__(message)


@dataclass
class ServiceConfig:
    data_dir: str
    grammar_path: str
    bilingual_path: Optional[str] = None
    prefs_path: Optional[str] = None
    specialized_path: Optional[str] = None
    model_path: Optional[str] = None
    sentences_path: Optional[str] = None
    corpus_path: Optional[str] = None
    time_limit_ms: int = 30000
    max_analyses: int = 64

    def __post_init__(self):
        if self.time_limit_ms <= 0:
            raise ValueError("time_limit must be positive")
        os.makedirs(self.data_dir, exist_ok=True)


class Workbench:
    """Shared state behind the endpoints; owns persistence and locking."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        with open(config.grammar_path, encoding="utf-8") as fh:
            self.grammar = load_grammar(fh.read())
        self.specialized = None
        if config.specialized_path:
            with open(config.specialized_path, encoding="utf-8") as fh:
                self.specialized = ebl.load_specialized(fh.read())
        self.model = pruner.PruneModel.load(config.model_path) if config.model_path else None
        lexicon = ()
        if config.bilingual_path:
            with open(config.bilingual_path, encoding="utf-8") as fh:
                lexicon = tuple(load_bilingual(fh.read()))
        prefs = LexPreference.load(config.prefs_path) if config.prefs_path else LexPreference()
        self.resources = TranslationResources(
            lexicon=lexicon, rules=self.grammar.transfer_rules, prefs=prefs,
            grammar=self.grammar, specialized=self.specialized)

        self.store = treebanker.TreebankStore(os.path.join(config.data_dir, "treebank.jsonl"))
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._classes_lock = threading.Lock()

        if config.sentences_path:
            with open(config.sentences_path, encoding="utf-8") as fh:
                for i, line in enumerate(fh):
                    text = line.strip()
                    if text:
                        self.register_sentence(str(i), text)

        self.classes: list[corpus_mod.TagSequenceClass] = []
        self._edits_log = os.path.join(config.data_dir, "class_edits.jsonl")
        if config.corpus_path:
            with open(config.corpus_path, encoding="utf-8") as fh:
                raw = [l.strip() for l in fh if l.strip()]
            tagger = corpus_mod.Tagger(self.grammar)
            utterances = corpus_mod.split_utterances(raw, tagger)
            self.classes = corpus_mod.group_by_tagsequence(utterances)
            if os.path.exists(self._edits_log):
                with open(self._edits_log, encoding="utf-8") as fh:
                    for line in fh:
                        if line.strip():
                            self.classes = corpus_mod.regroup(self.classes,
                                                              json.loads(line)["edits"])

    def lock_for(self, sentence_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(sentence_id, threading.Lock())

    def register_sentence(self, sentence_id: str, text: str):
        if sentence_id in self.store.sessions:
            return
        outputs = parse_staged(linear_lattice(text), self.grammar,
                               self.specialized, self.model, ParseConfig())
        analyses = [c.derivation for c in
                    outputs.chart.full_span_analyses(self.grammar.start.symbol)]
        analyses = analyses[: self.config.max_analyses]
        if not analyses:
            return
        matrix = treebanker.build_incidence(analyses, self.grammar, self.specialized)
        self.store.register(sentence_id, text, matrix)

    def parse_payload(self, body: dict):
        if "text" in body:
            return linear_lattice(body["text"])
        if "lattice" in body:
            return Lattice.from_json(json.dumps(body["lattice"]))
        raise ServiceError("bad-request", "provide 'text' or 'lattice'")

    def apply_class_edits(self, edits: list[dict]):
        with self._classes_lock:
            updated = corpus_mod.regroup(self.classes, edits)
            corpus_mod.check_partition(updated)
            with open(self._edits_log, "a", encoding="utf-8") as fh:
                fh.write(json.dumps({"edits": edits, "ts": time.time()}) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self.classes = updated


def _session_view(session: treebanker.Session) -> dict:
    state = session.state
    return {
        "id": session.sentence_id,
        "text": session.text,
        "status": state.status,
        "remaining": len(state.remaining),
        "analyses": len(state.matrix.analyses),
        "judged": len(state.judgments),
        "approved": state.approved,
    }


def _discriminant_rows(session: treebanker.Session) -> list[dict]:
    state = session.state
    rows = []
    for r in state.matrix.rows:
        j = state.verdict_for(r.discriminant.full_key)
        rows.append({
            "key": r.discriminant.full_key,
            "kind": r.discriminant.kind,
            "label": r.discriminant.key,
            "span": r.span_length,
            "holds": len(r.holds_in),
            "verdict": j.verdict if j else None,
            "source": j.source if j else None,
        })
    return rows


def create_app(config: ServiceConfig) -> FastAPI:
    bench = Workbench(config)
    app = FastAPI(title="slt-workbench")
    app.state.workbench = bench
    # the browser workbench is served separately; allow it to call the API
    from fastapi.middleware.cors import CORSMiddleware
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    @app.exception_handler(ServiceError)
    async def service_error(_req: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status, content={
            "code": exc.code, "message": exc.message, "detail": exc.detail})

    @app.exception_handler(treebanker.JudgmentConflict)
    async def conflict_error(_req: Request, exc: treebanker.JudgmentConflict):
        return JSONResponse(status_code=409, content={
            "code": "conflict", "message": str(exc), "detail": None})

    @app.exception_handler(treebanker.TreebankError)
    async def treebank_error(_req: Request, exc: treebanker.TreebankError):
        return JSONResponse(status_code=422, content={
            "code": "treebank", "message": str(exc), "detail": None})

    @app.exception_handler(corpus_mod.CorpusError)
    async def corpus_error(_req: Request, exc: corpus_mod.CorpusError):
        return JSONResponse(status_code=422, content={
            "code": "corpus", "message": str(exc), "detail": None})

    @app.get("/health")
    def health():
        return {"status": "ok", "grammar": bench.grammar.fingerprint()}

    @app.post("/parse")
    def parse(body: dict):
        lattice = bench.parse_payload(body)
        outputs = parse_staged(lattice, bench.grammar, bench.specialized,
                               bench.model, ParseConfig())
        return outputs.to_json()

    @app.post("/translate")
    def translate(body: dict):
        lattice = bench.parse_payload(body)
        limit = body.get("time_limit", config.time_limit_ms) / 1000.0
        if limit <= 0:
            raise ServiceError("bad-request", "time_limit must be positive")
        outputs = parse_staged(lattice, bench.grammar, bench.specialized,
                               bench.model, ParseConfig())
        emissions = anytime_translate(outputs.stage_fragments(),
                                      outputs.chart.vertex_count,
                                      bench.resources, time_limit=limit,
                                      deep=body.get("deep", True))
        return {"iterations": [
            {"iteration": e.iteration, "stage": e.stage, "text": e.text,
             "score": e.score} for e in emissions]}

    @app.get("/sentences")
    def sentences(status: Optional[str] = None):
        out = [_session_view(s) for s in bench.store.sessions.values()]
        if status:
            out = [s for s in out if s["status"] == status]
        return {"sentences": out}

    @app.get("/sentences/{sid}/discriminants")
    def discriminants(sid: str):
        session = bench.store.get(sid)
        return {"sentence": _session_view(session),
                "discriminants": _discriminant_rows(session)}

    @app.post("/sentences/{sid}/judgments")
    def judge(sid: str, body: dict):
        if "discriminant" not in body or "verdict" not in body:
            raise ServiceError("bad-request", "need 'discriminant' and 'verdict'")
        with bench.lock_for(sid):
            session = bench.store.get(sid)
            expected = body.get("version")
            if expected is not None and expected != len(session.state.judgments):
                raise ServiceError("conflict", "session advanced; reload", 409,
                                   {"state": _session_view(session)})
            before = {j.full_key for j in session.state.judgments}
            state = bench.store.judge(sid, body["discriminant"], body["verdict"],
                                      timestamp=body.get("ts", time.time()),
                                      request_id=body.get("request_id"))
        propagated = [j.full_key for j in state.judgments
                      if j.full_key not in before and j.source == treebanker.PROPAGATED]
        return {"remaining": len(state.remaining), "status": state.status,
                "propagated": propagated, "version": len(state.judgments)}

    @app.post("/sentences/{sid}/undo")
    def undo(sid: str, body: Optional[dict] = None):
        body = body or {}
        with bench.lock_for(sid):
            state = bench.store.undo(sid, request_id=body.get("request_id"))
        return {"remaining": len(state.remaining), "status": state.status,
                "version": len(state.judgments)}

    @app.post("/sentences/{sid}/resolve")
    def do_resolve(sid: str, body: dict):
        mode = body.get("mode", treebanker.UNIQUE_REQUIRED)
        with bench.lock_for(sid):
            approved = bench.store.resolve(sid, mode,
                                           request_id=body.get("request_id"))
        return {"approved": approved, "status": bench.store.get(sid).state.status}

    @app.get("/classes")
    def classes():
        with bench._classes_lock:
            return {"classes": corpus_mod.classes_to_json(bench.classes)}

    @app.post("/classes/edits")
    def class_edits(body: dict):
        edits = body.get("edits")
        if not isinstance(edits, list):
            raise ServiceError("bad-request", "need an 'edits' list")
        bench.apply_class_edits(edits)
        return {"classes": corpus_mod.classes_to_json(bench.classes)}

    @app.get("/subcorpus/report")
    def subcorpus_report():
        with bench._classes_lock:
            report = corpus_mod.build_subcorpus(bench.classes)
        return {"rows": [{"size": size, "representative": seg.text,
                          "class_tags": list(seg.tags)}
                         for seg, size in report.rows],
                "total_segments": report.total_segments,
                "top10_coverage": report.coverage(10)}

    @app.post("/train/prune")
    def train_prune(body: Optional[dict] = None):
        entries = bench.store.export_training_data()
        if not entries:
            raise ServiceError("bad-request", "no resolved sentences to train on")
        model = pruner.train(entries, bench.grammar, corpus_id="service")
        path = os.path.join(config.data_dir, "prune_model.jsonl")
        model.save(path)
        bench.model = model
        return {"discriminants": len(model.stats), "skipped": model.skipped,
                "path": path}

    @app.post("/train/specialize")
    def train_specialize(body: Optional[dict] = None):
        body = body or {}
        entries = bench.store.export_training_data()
        if not entries:
            raise ServiceError("bad-request", "no resolved sentences to train on")
        cuts = frozenset(body.get("cuts", ["NP"]))
        sg = ebl.specialize(entries, bench.grammar, ebl.CutCriteria(cuts))
        path = os.path.join(config.data_dir, "specialized.slt")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(ebl.specialized_to_text(sg))
        bench.specialized = sg
        return {"macros": len(sg.macros), "path": path}

    return app


def serve(config: ServiceConfig, host: str = "127.0.0.1", port: int = 8040):
    import uvicorn
    app = create_app(config)
    uvicorn.run(app, host=host, port=port, log_level="warning")
