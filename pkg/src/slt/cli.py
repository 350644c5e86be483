"""Batch entry points: the full train -> specialize -> parse -> translate
loop without the service or UI.  Plain files in, plain files out."""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import time

from . import corpus as corpus_mod
from . import ebl, pruner
from .grammar import GrammarError, load_grammar
from .lattice import Lattice, LatticeError, conflate_nbest, linear_lattice, load_nbest
from .lr import compile_lr, glr_parse, lexical_alternatives
from .pipeline import ParseConfig, parse_staged
from .pruner import PruneConfig
from .translator import (LexPreference, TranslationResources, anytime_translate,
                         load_bilingual)
from .treebanker import load_treebank


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise SystemExit(f"slt: cannot read {path}: {exc.strerror}")


def _load_grammar(path: str):
    try:
        return load_grammar(_read(path))
    except GrammarError as exc:
        raise SystemExit(f"slt: {path}: {exc}")


def _load_specialized(path: str):
    try:
        return ebl.load_specialized(_read(path))
    except (GrammarError, ebl.EBLError) as exc:
        raise SystemExit(f"slt: {path}: {exc}")


def _input_lattice(args) -> Lattice:
    if args.text:
        return linear_lattice(args.text)
    return Lattice.from_json(_read(args.lattice))


def cmd_parse(args) -> int:
    grammar = _load_grammar(args.grammar)
    specialized = _load_specialized(args.specialized) if args.specialized else None
    model = pruner.PruneModel.load(args.model) if args.model else None
    config = ParseConfig()
    if args.prune_after:
        levels = frozenset(int(x) for x in args.prune_after.split(","))
        config.prune = PruneConfig(args.theta, args.theta, levels)
    outputs = parse_staged(_input_lattice(args), grammar, specialized, model, config)
    if args.stages:
        print(json.dumps(outputs.to_json(), indent=2))
    else:
        print(json.dumps(outputs.stages[-1].to_json(), indent=2))
    return 0


def cmd_translate(args) -> int:
    grammar = _load_grammar(args.grammar)
    lexicon = load_bilingual(_read(args.bilingual))
    prefs = LexPreference.load(args.prefs) if args.prefs else LexPreference()
    resources = TranslationResources(lexicon=lexicon, rules=grammar.transfer_rules,
                                     prefs=prefs, grammar=grammar)
    outputs = parse_staged(_input_lattice(args), grammar)
    emissions = anytime_translate(outputs.stage_fragments(),
                                  outputs.chart.vertex_count, resources,
                                  time_limit=args.time_limit / 1000.0,
                                  deep=not args.surface_only)
    print(json.dumps([{"iteration": e.iteration, "stage": e.stage,
                       "text": e.text, "score": e.score} for e in emissions],
                     indent=2))
    return 0


def cmd_conflate(args) -> int:
    try:
        hypotheses = load_nbest(_read(args.nbest))
        lattice = conflate_nbest(hypotheses, n_max=args.n_max)
    except LatticeError as exc:
        raise SystemExit(f"slt: {exc}")
    out = lattice.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out + "\n")
    else:
        print(out)
    return 0


def cmd_subcorpus(args) -> int:
    grammar = _load_grammar(args.grammar)
    raw = [l.strip() for l in _read(args.corpus).splitlines() if l.strip()]
    tagger = corpus_mod.Tagger(grammar)
    classes = corpus_mod.group_by_tagsequence(corpus_mod.split_utterances(raw, tagger))
    if args.edits:
        classes = corpus_mod.regroup(classes, json.loads(_read(args.edits)))
    report = corpus_mod.build_subcorpus(classes)
    text = report.to_tsv()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_train_prune(args) -> int:
    grammar = _load_grammar(args.grammar)
    treebank = load_treebank(args.treebank)
    model = pruner.train(treebank, grammar, alpha=args.alpha, corpus_id=args.treebank)
    model.save(args.out)
    print(f"trained {len(model.stats)} discriminants from {len(treebank)} entries "
          f"({len(model.skipped)} skipped) -> {args.out}")
    return 0


def cmd_specialize(args) -> int:
    grammar = _load_grammar(args.grammar)
    treebank = load_treebank(args.treebank)
    criteria = ebl.CutCriteria(frozenset(args.cuts.split(",")),
                               min_frequency=args.min_freq)
    sg = ebl.specialize(treebank, grammar, criteria)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(ebl.specialized_to_text(sg))
    print(f"{len(sg.macros)} macro-rules -> {args.out}")
    return 0


def cmd_compile_lr(args) -> int:
    sg = _load_specialized(args.specialized)
    table = compile_lr(sg)
    dump = table.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(dump + "\n")
    else:
        print(dump)
    print(f"{table.state_count} states, {len(table.conflicts())} conflicted cells",
          file=sys.stderr)
    return 0


def cmd_bench(args) -> int:
    from .chart import Chart, full_parse, lexical_pass, phrasal_pass
    grammar = _load_grammar(args.grammar)
    sg = _load_specialized(args.specialized)
    table = compile_lr(sg)
    sentences = [l.strip() for l in _read(args.corpus).splitlines() if l.strip()]
    rows = []
    for i, s in enumerate(sentences):
        t0 = time.perf_counter()
        chart = Chart(linear_lattice(s))
        lexical_pass(chart, grammar)
        phrasal_pass(chart, grammar)
        full_parse(chart, grammar)
        t_orig = time.perf_counter() - t0
        n_orig = len(chart.full_span_analyses(grammar.start.symbol))
        t0 = time.perf_counter()
        analyses = glr_parse(lexical_alternatives(s.split(), grammar), table, sg)
        t_spec = time.perf_counter() - t0
        rows.append((i, t_orig, t_spec, n_orig, len(analyses)))
    out = sys.stdout if not args.out else open(args.out, "w", encoding="utf-8")
    out.write("idx\torig_ms\tspec_ms\torig_analyses\tspec_analyses\tcovered\n")
    for i, t_orig, t_spec, n_orig, n_spec in rows:
        out.write(f"{i}\t{t_orig*1000:.3f}\t{t_spec*1000:.3f}\t{n_orig}\t{n_spec}"
                  f"\t{int(bool(n_spec) or not n_orig)}\n")
    med_o = statistics.median(r[1] for r in rows)
    med_s = statistics.median(r[2] for r in rows)
    parsed = sum(1 for r in rows if r[3])
    covered = sum(1 for r in rows if r[3] and r[4])
    retention = covered / parsed if parsed else 1.0
    summary = (f"median_orig_ms={med_o*1000:.3f} median_spec_ms={med_s*1000:.3f} "
               f"speedup_ratio={med_s/med_o:.3f} coverage_retention={retention:.3f}")
    out.write(f"# {summary}\n")
    if args.out:
        out.close()
        print(summary)
    return 0


def cmd_serve(args) -> int:
    from .service import ServiceConfig, serve
    config = ServiceConfig(
        data_dir=args.data_dir, grammar_path=args.grammar,
        bilingual_path=args.bilingual, prefs_path=args.prefs,
        specialized_path=args.specialized, model_path=args.model,
        sentences_path=args.sentences, corpus_path=args.corpus,
        time_limit_ms=args.time_limit)
    serve(config, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slt", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("parse", help="staged parse of text or a lattice file")
    sp.add_argument("--grammar", required=True)
    sp.add_argument("--specialized")
    sp.add_argument("--model")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--text")
    src.add_argument("--lattice")
    sp.add_argument("--stages", action="store_true", help="print all four stages")
    sp.add_argument("--prune-after", help="comma-separated constituent levels")
    sp.add_argument("--theta", type=float, default=0.02)
    sp.set_defaults(fn=cmd_parse)

    sp = sub.add_parser("translate", help="anytime translation of text or a lattice")
    sp.add_argument("--grammar", required=True)
    sp.add_argument("--bilingual", required=True)
    sp.add_argument("--prefs")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--text")
    src.add_argument("--lattice")
    sp.add_argument("--time-limit", type=int, default=30000, help="milliseconds")
    sp.add_argument("--surface-only", action="store_true")
    sp.set_defaults(fn=cmd_translate)

    sp = sub.add_parser("conflate", help="build a lattice from an n-best file")
    sp.add_argument("--nbest", required=True)
    sp.add_argument("--n-max", type=int, default=5)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_conflate)

    sp = sub.add_parser("subcorpus", help="representative subcorpus report")
    sp.add_argument("--grammar", required=True)
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--edits", help="JSON file with a list of class edits")
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_subcorpus)

    sp = sub.add_parser("train-prune", help="train a prune model from a treebank")
    sp.add_argument("--grammar", required=True)
    sp.add_argument("--treebank", required=True)
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_train_prune)

    sp = sub.add_parser("specialize", help="learn a specialized grammar")
    sp.add_argument("--grammar", required=True)
    sp.add_argument("--treebank", required=True)
    sp.add_argument("--cuts", default="NP")
    sp.add_argument("--min-freq", type=int, default=1)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_specialize)

    sp = sub.add_parser("compile-lr", help="compile LR tables for a specialized grammar")
    sp.add_argument("specialized")
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_compile_lr)

    sp = sub.add_parser("bench", help="original vs specialized parse timing")
    sp.add_argument("--grammar", required=True)
    sp.add_argument("--specialized", required=True)
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_bench)

    sp = sub.add_parser("serve", help="run the HTTP service")
    sp.add_argument("--grammar", required=True)
    sp.add_argument("--data-dir", required=True)
    sp.add_argument("--bilingual")
    sp.add_argument("--prefs")
    sp.add_argument("--specialized")
    sp.add_argument("--model")
    sp.add_argument("--sentences")
    sp.add_argument("--corpus")
    sp.add_argument("--time-limit", type=int, default=30000)
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8040)
    sp.set_defaults(fn=cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except LatticeError as exc:
        print(f"slt: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
