"""Cross-validated evaluation of the concept learner plus report output.

A run partitions each shape's demonstrations into five folds, trains one
learner per fold on that fold's training share (with the grading teacher
in the loop) and classifies the held-out demonstrations by nearest
recognition PB. Results aggregate into classification-rate tables,
row-normalized confusion/confidence matrices, a reward learning curve and
a 2-D embedding of the learned PB space, all written as deterministic
CSV/JSON/SVG files.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import engine, memory, svgplot, teacher as teacher_mod
from .config import RunConfig
from .dataset import compute_normalization, make_folds
from .memory import Mem

log = logging.getLogger(__name__)

CONFIDENCE_CAP = 1e6


def classical_mds(points: np.ndarray, dim: int = 2) -> np.ndarray:
    """Metric MDS via double centering of squared distances.

    Embeds points so Euclidean distances are preserved as well as the top
    ``dim`` eigenvalues allow. Axes are deterministic: each is flipped so
    its largest-magnitude coordinate is positive.
    """
    points = np.asarray(points, dtype=float)
    n = len(points)
    if n == 1:
        return np.zeros((1, dim))
    diff = points[:, None, :] - points[None, :, :]
    d2 = np.sum(diff * diff, axis=2)
    j = np.eye(n) - np.full((n, n), 1.0 / n)
    b = -0.5 * (j @ d2 @ j)
    vals, vecs = np.linalg.eigh(b)
    order = np.argsort(vals)[::-1][:dim]
    coords = np.zeros((n, dim))
    for k, idx in enumerate(order):
        lam = max(float(vals[idx]), 0.0)
        axis = vecs[:, idx] * np.sqrt(lam)
        pivot = int(np.argmax(np.abs(axis)))
        if axis[pivot] < 0:
            axis = -axis
        coords[:, k] = axis
    return coords


@dataclass
class FoldResult:
    fold_index: int
    mem: Mem
    episodes: list
    predictions: list          # dicts from engine.infer + prediction fields
    concept_names: dict        # learner concept id -> true concept name
    ccr: float                 # percent correct on the held-out set
    confusion: np.ndarray      # rows: true, cols: predicted, rows sum to 100
    confidence: np.ndarray     # confidence mass, rows normalized to 100
    rewards: list
    queries_total: int


@dataclass
class CVResult:
    labels: list
    folds: list = field(default_factory=list)

    @property
    def ccr_values(self) -> np.ndarray:
        return np.array([f.ccr for f in self.folds])

    @property
    def ccr_mean(self) -> float:
        return float(np.mean(self.ccr_values))

    @property
    def ccr_std(self) -> float:
        return float(np.std(self.ccr_values))

    @property
    def confusion_mean(self) -> np.ndarray:
        return np.mean([f.confusion for f in self.folds], axis=0)

    @property
    def confidence_mean(self) -> np.ndarray:
        return np.mean([f.confidence for f in self.folds], axis=0)

    def reward_curve(self):
        """Elementwise mean over folds (folds may differ in episode count).

        Returns (mean rewards, smoothed mean, contributing fold counts).
        """
        longest = max(len(f.rewards) for f in self.folds)
        sums = np.zeros(longest)
        counts = np.zeros(longest)
        for f in self.folds:
            r = np.asarray(f.rewards, dtype=float)
            sums[:len(r)] += r
            counts[:len(r)] += 1
        mean = sums / counts
        return mean, teacher_mod.smoothed_signal(mean), counts.astype(int)


def matrices_from_predictions(predictions, labels):
    """Row-normalized confusion and confidence-mass matrices (rows = 100)."""
    index = {name: i for i, name in enumerate(labels)}
    n = len(labels)
    confusion = np.zeros((n, n))
    confidence = np.zeros((n, n))
    for p in predictions:
        t = index[p["true_concept"]]
        q = index[p["predicted_concept"]]
        confusion[t, q] += 1.0
        confidence[t, q] += p["confidence"]
    for mat in (confusion, confidence):
        for r in range(n):
            s = mat[r].sum()
            if s > 0:
                mat[r] *= 100.0 / s
    return confusion, confidence


def compute_ccr(predictions) -> float:
    correct = sum(1 for p in predictions if p["correct"])
    return 100.0 * correct / len(predictions)


def run_fold(corpus: dict, fold, cfg: RunConfig, labels) -> FoldResult:
    """Train on the fold's training share, classify its held-out demos."""
    train = [corpus[i] for i in fold.train]
    test = [corpus[i] for i in fold.test]
    stats = compute_normalization(train)
    oracle = teacher_mod.TeacherOracle()
    seed = np.random.SeedSequence(entropy=cfg.seed,
                                  spawn_key=(fold.fold_index,))
    mem, episodes = engine.run_training(train, stats, oracle, cfg.net,
                                        cfg.engine, seed)
    names = engine.concept_purity_map(mem)
    predictions = engine.infer(mem, test, cfg.net)
    for p in predictions:
        p["predicted_concept"] = names[p["concept_label"]]
        p["correct"] = p["predicted_concept"] == p["true_concept"]
        p["fold"] = fold.fold_index
    confusion, confidence = matrices_from_predictions(predictions, labels)
    result = FoldResult(
        fold_index=fold.fold_index, mem=mem, episodes=episodes,
        predictions=predictions, concept_names=names,
        ccr=compute_ccr(predictions), confusion=confusion,
        confidence=confidence, rewards=[e.reward for e in episodes],
        queries_total=oracle.queries)
    log.info("fold %d: ccr=%.3f%% entries=%d concepts=%d queries=%d",
             fold.fold_index, result.ccr, mem.num_entries,
             len(mem.concept_ids), oracle.queries)
    return result


def run_cv(corpus_demos, cfg: RunConfig, folds=None) -> CVResult:
    """Five-fold cross validation over a processed corpus."""
    corpus = {d.demo_id: d for d in corpus_demos}
    labels = sorted({d.concept_label for d in corpus_demos})
    if folds is None:
        folds = make_folds(corpus_demos, cfg.seed)
    result = CVResult(labels=labels)
    for fold in folds:
        result.folds.append(run_fold(corpus, fold, cfg, labels))
    log.info("cv complete: ccr %.3f +- %.3f",
             result.ccr_mean, result.ccr_std)
    return result


def regenerated_paths(mem: Mem, names: dict):
    """Best reproduction per concept as physical (y, z) paths.

    Picks each concept's lowest closed-loop-error entry, rolls it out and
    integrates the de-normalized position increments from the entry's
    initial configuration. Returns [(concept id, name, (n, 2) array)].
    """
    out = []
    for cid in mem.concept_ids:
        idx = engine.best_action_index(mem, cid)
        entry = mem.entries[idx]
        rows = memory.regenerate(mem, entry)
        deltas = mem.stats.denormalize_deltas(rows)
        path = np.vstack([entry.initial_info[:2],
                          entry.initial_info[:2] + np.cumsum(deltas[:, :2], axis=0)])
        out.append((cid, names[cid], path))
    return out


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_matrix(path, matrix, labels) -> None:
    header = ["true\\predicted"] + list(labels)
    rows = [[labels[r]] + [repr(float(v)) for v in matrix[r]]
            for r in range(len(labels))]
    _write_csv(path, header, rows)


def write_report(out_dir, result: CVResult, cfg: RunConfig) -> None:
    """Write the full deterministic report bundle for a CV run."""
    os.makedirs(out_dir, exist_ok=True)
    labels = result.labels

    rows = [[f.fold_index, f.ccr, f.queries_total, len(f.episodes),
             f.mem.num_entries, len(f.mem.concept_ids),
             f.mem.num_prototypes] for f in result.folds]
    _write_csv(os.path.join(out_dir, "ccr.csv"),
               ["fold", "ccr", "teacher_queries", "episodes", "entries",
                "concepts", "prototypes"], rows)

    _write_matrix(os.path.join(out_dir, "confusion.csv"),
                  result.confusion_mean, labels)
    _write_matrix(os.path.join(out_dir, "confidence.csv"),
                  result.confidence_mean, labels)

    pred_rows = []
    for f in result.folds:
        for p in f.predictions:
            pred_rows.append([f.fold_index, p["demo_id"], p["true_concept"],
                              p["predicted_concept"], p["concept_label"],
                              p["entry_source"], p["distance"],
                              p["confidence"], p["correct"]])
    _write_csv(os.path.join(out_dir, "predictions.csv"),
               ["fold", "demo_id", "true_concept", "predicted_concept",
                "concept_label", "entry_source", "distance", "confidence",
                "correct"], pred_rows)

    ep_rows = []
    for f in result.folds:
        for e in f.episodes:
            ep_rows.append([f.fold_index, e.episode_index, e.demo_id,
                            e.true_concept, e.outcome, e.concept_label,
                            e.reward, len(e.attempts), e.queries_total,
                            "" if e.train_mse is None else repr(e.train_mse),
                            e.num_entries, e.num_concepts])
    _write_csv(os.path.join(out_dir, "episodes.csv"),
               ["fold", "episode", "demo_id", "true_concept", "outcome",
                "concept_label", "reward", "attempts", "queries_total",
                "train_mse", "entries", "concepts"], ep_rows)

    mean_r, smooth_r, counts = result.reward_curve()
    _write_csv(os.path.join(out_dir, "reward.csv"),
               ["episode", "mean_reward", "smoothed_reward", "folds"],
               [[t, mean_r[t], smooth_r[t], counts[t]]
                for t in range(len(mean_r))])

    emb_rows = []
    for f in result.folds:
        coords = classical_mds(np.array([e.pb for e in f.mem.entries]))
        for i, e in enumerate(f.mem.entries):
            emb_rows.append([f.fold_index, i, e.source_id, e.concept_label,
                             e.true_concept, e.kind, e.num_samples,
                             coords[i, 0], coords[i, 1]])
    _write_csv(os.path.join(out_dir, "pb_embedding.csv"),
               ["fold", "entry", "source", "concept_label", "true_concept",
                "kind", "num_samples", "x", "y"], emb_rows)

    fold0 = result.folds[0]
    regen_dir = os.path.join(out_dir, "regenerated")
    os.makedirs(regen_dir, exist_ok=True)
    regen = regenerated_paths(fold0.mem, fold0.concept_names)
    for cid, name, path in regen:
        _write_csv(os.path.join(regen_dir, f"concept{cid:02d}_{name}.csv"),
                   ["t", "y", "z"],
                   [[t, path[t, 0], path[t, 1]] for t in range(len(path))])

    summary = {
        "ccr_mean": result.ccr_mean,
        "ccr_std": result.ccr_std,
        "ccr_per_fold": [f.ccr for f in result.folds],
        "labels": labels,
        "entries_per_fold": [f.mem.num_entries for f in result.folds],
        "concepts_per_fold": [len(f.mem.concept_ids) for f in result.folds],
        "prototypes_per_fold": [f.mem.num_prototypes for f in result.folds],
        "teacher_queries_per_fold": [f.queries_total for f in result.folds],
        "episodes_per_fold": [len(f.episodes) for f in result.folds],
        "per_concept_recall": per_concept_recall(result),
        "seed": cfg.seed,
    }
    with open(os.path.join(out_dir, "summary.json"), "w",
              encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")

    episodes_axis = np.arange(len(mean_r), dtype=float)
    svgplot.line_chart(
        os.path.join(out_dir, "reward.svg"),
        [("reward", episodes_axis, mean_r), ("smoothed", episodes_axis, smooth_r)],
        title="Teacher reward over training episodes",
        xlabel="episode", ylabel="reward")
    svgplot.heatmap(
        os.path.join(out_dir, "confusion.svg"), result.confusion_mean,
        labels, labels, title="Confusion (%), mean over folds",
        value_fmt="{:.0f}")
    groups = {}
    coords0 = classical_mds(np.array([e.pb for e in fold0.mem.entries]))
    for i, e in enumerate(fold0.mem.entries):
        groups.setdefault(e.true_concept, ([], []))
        groups[e.true_concept][0].append(coords0[i, 0])
        groups[e.true_concept][1].append(coords0[i, 1])
    svgplot.scatter_chart(
        os.path.join(out_dir, "pb_embedding.svg"),
        [(name, xs, ys) for name, (xs, ys) in sorted(groups.items())],
        title="PB space of fold 0 (2-D embedding)")
    svgplot.path_grid(
        os.path.join(out_dir, "regenerated.svg"),
        [(name, path) for _, name, path in regen],
        title="Best regenerated pattern per concept (fold 0)")


def write_memory_report(out_dir, mem: Mem) -> None:
    """Describe one memory snapshot: entry table, embedding, reproductions."""
    os.makedirs(out_dir, exist_ok=True)
    names = engine.concept_purity_map(mem)
    pb_dim = mem.weights.pb_dim if mem.weights is not None else 0
    header = (["entry", "source", "concept_label", "concept_name", "kind",
               "num_samples", "num_steps", "generation_error"]
              + [f"pb{k}" for k in range(pb_dim)]
              + [f"pb_rec{k}" for k in range(pb_dim)])
    rows = []
    for i, e in enumerate(mem.entries):
        rows.append([i, e.source_id, e.concept_label,
                     names[e.concept_label], e.kind, e.num_samples,
                     e.num_steps, e.generation_error]
                    + [repr(float(v)) for v in e.pb]
                    + [repr(float(v)) for v in e.pb_rec])
    _write_csv(os.path.join(out_dir, "entries.csv"), header, rows)
    if mem.num_entries == 0:
        return
    coords = classical_mds(np.array([e.pb for e in mem.entries]))
    _write_csv(os.path.join(out_dir, "pb_embedding.csv"),
               ["entry", "source", "concept_label", "true_concept", "kind",
                "num_samples", "x", "y"],
               [[i, e.source_id, e.concept_label, e.true_concept, e.kind,
                 e.num_samples, coords[i, 0], coords[i, 1]]
                for i, e in enumerate(mem.entries)])
    groups = {}
    for i, e in enumerate(mem.entries):
        groups.setdefault(e.true_concept, ([], []))
        groups[e.true_concept][0].append(coords[i, 0])
        groups[e.true_concept][1].append(coords[i, 1])
    svgplot.scatter_chart(
        os.path.join(out_dir, "pb_embedding.svg"),
        [(name, xs, ys) for name, (xs, ys) in sorted(groups.items())],
        title="PB space (2-D embedding)")
    regen_dir = os.path.join(out_dir, "regenerated")
    os.makedirs(regen_dir, exist_ok=True)
    regen = regenerated_paths(mem, names)
    for cid, name, path in regen:
        _write_csv(os.path.join(regen_dir, f"concept{cid:02d}_{name}.csv"),
                   ["t", "y", "z"],
                   [[t, path[t, 0], path[t, 1]] for t in range(len(path))])
    svgplot.path_grid(
        os.path.join(out_dir, "regenerated.svg"),
        [(name, path) for _, name, path in regen],
        title="Best regenerated pattern per concept")


def per_concept_recall(result: CVResult) -> dict:
    """Recall (%) per true concept pooled over every fold's predictions."""
    totals = {}
    hits = {}
    for f in result.folds:
        for p in f.predictions:
            t = p["true_concept"]
            totals[t] = totals.get(t, 0) + 1
            hits[t] = hits.get(t, 0) + (1 if p["correct"] else 0)
    return {t: 100.0 * hits[t] / totals[t] for t in sorted(totals)}
