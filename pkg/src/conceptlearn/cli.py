"""Command-line entry points.

Subcommands:

* ``preprocess`` -- run the geometric pipeline, cache the processed corpus
  and write the fold assignment.
* ``learn``      -- train one fold's learner and snapshot its memory.
* ``infer``      -- classify corpus demonstrations against a snapshot.
* ``eval``       -- full five-fold cross validation plus report bundle.
* ``report``     -- describe a memory snapshot (entries, embedding,
  regenerated patterns).

Every command copies the resolved configuration into the output directory.
Exit codes: 0 success, 2 configuration problems, 3 data problems,
4 training divergence, 1 anything else. Log verbosity comes from the
``CONCEPTLEARN_LOG`` environment variable (default WARNING).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import engine, evaluation, memory
from .config import RunConfig, dump_config, load_config
from .dataset import (dump_folds, load_corpus, load_label_map, make_folds,
                      preprocess_corpus, save_processed_corpus)
from .errors import (ConceptLearnError, ConfigError, DataError,
                     DivergenceError)

log = logging.getLogger(__name__)


def _resolved_config(args) -> RunConfig:
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "out", None) is not None:
        cfg = replace(cfg, out_dir=args.out)
    cfg.validate()
    return cfg


def _prepare_out(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.ini").write_text(dump_config(cfg), encoding="utf-8")
    return out


def _processed_demos(cfg: RunConfig):
    label_map = load_label_map(cfg.label_map)
    trajectories = load_corpus(cfg.corpus_dir, label_map)
    demos, stats = preprocess_corpus(trajectories, label_map, cfg.preprocess,
                                     cfg.arm, cfg.workspace)
    return demos, stats


def cmd_preprocess(args) -> int:
    cfg = _resolved_config(args)
    out = _prepare_out(cfg)
    demos, stats = _processed_demos(cfg)
    save_processed_corpus(out / "processed.bin", demos, stats, cfg.preprocess)
    folds = make_folds(demos, cfg.seed)
    (out / "folds.json").write_text(dump_folds(folds), encoding="utf-8")
    shapes = sorted({d.shape_name for d in demos})
    concepts = sorted({d.concept_label for d in demos})
    print(f"processed {len(demos)} demonstrations, {len(shapes)} shapes, "
          f"{len(concepts)} concepts -> {out}")
    return 0


def cmd_learn(args) -> int:
    cfg = _resolved_config(args)
    out = _prepare_out(cfg)
    demos, _ = _processed_demos(cfg)
    folds = make_folds(demos, cfg.seed)
    if not 0 <= args.fold < len(folds):
        raise ConfigError(f"fold must be in 0..{len(folds) - 1}")
    fold = folds[args.fold]
    labels = sorted({d.concept_label for d in demos})
    corpus = {d.demo_id: d for d in demos}
    result = evaluation.run_fold(corpus, fold, cfg, labels)
    snap = out / f"memory_fold{fold.fold_index}.bin"
    memory.save_memory(snap, result.mem,
                       meta_extra={"fold_index": fold.fold_index,
                                   "train_ids": fold.train})
    evaluation._write_csv(
        out / f"episodes_fold{fold.fold_index}.csv",
        ["episode", "demo_id", "true_concept", "outcome", "concept_label",
         "reward", "attempts", "queries_total", "train_mse", "entries",
         "concepts"],
        [[e.episode_index, e.demo_id, e.true_concept, e.outcome,
          e.concept_label, e.reward, len(e.attempts), e.queries_total,
          "" if e.train_mse is None else repr(e.train_mse), e.num_entries,
          e.num_concepts] for e in result.episodes])
    evaluation._write_csv(
        out / f"predictions_fold{fold.fold_index}.csv",
        ["demo_id", "true_concept", "predicted_concept", "concept_label",
         "entry_source", "distance", "confidence", "correct"],
        [[p["demo_id"], p["true_concept"], p["predicted_concept"],
          p["concept_label"], p["entry_source"], p["distance"],
          p["confidence"], p["correct"]] for p in result.predictions])
    print(f"fold {fold.fold_index}: ccr={result.ccr:.3f}% "
          f"entries={result.mem.num_entries} "
          f"concepts={len(result.mem.concept_ids)} "
          f"teacher_queries={result.queries_total}")
    print(f"snapshot -> {snap}")
    return 0


def cmd_infer(args) -> int:
    cfg = _resolved_config(args)
    out = _prepare_out(cfg)
    mem = memory.load_memory(args.snapshot)
    demos, _ = _processed_demos(cfg)
    demos = sorted(demos, key=lambda d: d.demo_id)
    names = engine.concept_purity_map(mem)
    predictions = engine.infer(mem, demos, cfg.net)
    rows = []
    correct = 0
    for p in predictions:
        predicted = names[p["concept_label"]]
        ok = predicted == p["true_concept"]
        correct += 1 if ok else 0
        rows.append([p["demo_id"], p["true_concept"], predicted,
                     p["concept_label"], p["entry_source"], p["distance"],
                     p["confidence"], ok])
    evaluation._write_csv(
        out / "inference.csv",
        ["demo_id", "true_concept", "predicted_concept", "concept_label",
         "entry_source", "distance", "confidence", "correct"], rows)
    print(f"classified {len(rows)} demonstrations: "
          f"{100.0 * correct / len(rows):.3f}% match their label "
          f"-> {out / 'inference.csv'}")
    return 0


def cmd_eval(args) -> int:
    cfg = _resolved_config(args)
    out = _prepare_out(cfg)
    demos, _ = _processed_demos(cfg)
    result = evaluation.run_cv(demos, cfg)
    evaluation.write_report(out, result, cfg)
    for fold in result.folds:
        memory.save_memory(out / f"memory_fold{fold.fold_index}.bin",
                           fold.mem,
                           meta_extra={"fold_index": fold.fold_index})
    print(f"ccr {result.ccr_mean:.3f}% +- {result.ccr_std:.3f} over "
          f"{len(result.folds)} folds -> {out}")
    return 0


def cmd_report(args) -> int:
    mem = memory.load_memory(args.snapshot)
    out = Path(args.out if args.out else "report")
    evaluation.write_memory_report(out, mem)
    print(f"memory report: {mem.num_entries} entries, "
          f"{len(mem.concept_ids)} concepts, "
          f"{mem.num_prototypes} prototypes -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conceptlearn",
        description="Incremental concept learning from demonstrated "
                    "movement patterns.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True,
                           help="INI run configuration")
            p.add_argument("--seed", type=int, default=None,
                           help="override [run] seed")
        p.add_argument("--out", default=None,
                       help="override the output directory")

    p = sub.add_parser("preprocess",
                       help="cache the processed corpus and fold split")
    add_common(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("learn", help="train one fold and snapshot memory")
    add_common(p)
    p.add_argument("--fold", type=int, default=0, help="fold index (0-4)")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("infer",
                       help="classify the corpus against a memory snapshot")
    add_common(p)
    p.add_argument("--snapshot", required=True, help="memory snapshot file")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("eval",
                       help="five-fold cross validation with full report")
    add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("report", help="describe a memory snapshot")
    add_common(p, needs_config=False)
    p.add_argument("--snapshot", required=True, help="memory snapshot file")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("CONCEPTLEARN_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    np.set_printoptions(legacy=False)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except DivergenceError as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return 4
    except ConceptLearnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
