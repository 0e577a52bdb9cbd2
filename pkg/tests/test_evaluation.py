"""Evaluation: MDS embedding, matrices, reports, fold orchestration."""

import json
import os

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conceptlearn import evaluation, memory
from conceptlearn.config import RunConfig
from conceptlearn.dataset import FoldSplit
from conceptlearn.engine import EpisodeLog
from conceptlearn.evaluation import (
    CVResult,
    FoldResult,
    classical_mds,
    compute_ccr,
    matrices_from_predictions,
    per_concept_recall,
    regenerated_paths,
)
from conceptlearn.teacher import smoothed_signal

from conftest import fake_demos, tiny_net, unit_stats


def pairdist(points):
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


# ------------------------------------------------------------------ MDS


def test_mds_preserves_planar_distances():
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(6, 2))
    emb = classical_mds(pts, dim=2)
    assert np.allclose(pairdist(pts), pairdist(emb), atol=1e-9)


def test_mds_single_point_and_duplicates():
    assert np.array_equal(classical_mds(np.array([[3.0, 4.0]])), np.zeros((1, 2)))
    emb = classical_mds(np.array([[1.0, 1.0], [1.0, 1.0]]))
    assert np.allclose(pairdist(emb)[0, 1], 0.0)


def test_mds_axis_orientation_deterministic():
    rng = np.random.default_rng(8)
    pts = rng.normal(size=(5, 4))
    emb = classical_mds(pts)
    again = classical_mds(pts.copy())
    assert np.array_equal(emb, again)
    for k in range(emb.shape[1]):
        pivot = int(np.argmax(np.abs(emb[:, k])))
        assert emb[pivot, k] >= 0


@given(st.integers(2, 7), st.integers(0, 2**31 - 1))
def test_mds_projection_never_expands(n, seed):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, 4))
    emb = classical_mds(pts, dim=2)
    assert np.all(pairdist(emb) <= pairdist(pts) + 1e-8)


# ------------------------------------------------------------- matrices


def pred(true, predicted, confidence=1.0, correct=None, **extra):
    out = {
        "demo_id": extra.pop("demo_id", f"{true}/0"),
        "true_concept": true,
        "predicted_concept": predicted,
        "concept_label": extra.pop("concept_label", 0),
        "entry_source": extra.pop("entry_source", "e/0"),
        "distance": extra.pop("distance", 0.1),
        "confidence": confidence,
        "correct": (true == predicted) if correct is None else correct,
    }
    out.update(extra)
    return out


def test_matrices_rows_sum_to_100():
    labels = ["a", "b", "c"]
    preds = [
        pred("a", "a"), pred("a", "a"), pred("a", "b"), pred("a", "c"),
        pred("b", "b", confidence=3.0), pred("b", "a", confidence=1.0),
    ]
    confusion, confidence = matrices_from_predictions(preds, labels)
    assert np.allclose(confusion[0], [50.0, 25.0, 25.0])
    assert np.allclose(confusion[1], [50.0, 50.0, 0.0])
    assert np.allclose(confusion[2], 0.0)  # no examples of c: row stays zero
    assert np.allclose(confidence[1], [25.0, 75.0, 0.0])
    for row in range(2):
        assert abs(confusion[row].sum() - 100.0) < 1e-9
        assert abs(confidence[row].sum() - 100.0) < 1e-9


def test_compute_ccr():
    preds = [pred("a", "a"), pred("a", "b"), pred("b", "b"), pred("b", "b")]
    assert compute_ccr(preds) == 75.0


def test_per_concept_recall_pools_folds():
    r = CVResult(labels=["a", "b"])
    mk = lambda preds: FoldResult(
        fold_index=0, mem=None, episodes=[], predictions=preds,
        concept_names={}, ccr=0.0, confusion=np.zeros((2, 2)),
        confidence=np.zeros((2, 2)), rewards=[], queries_total=0)
    r.folds.append(mk([pred("a", "a"), pred("b", "a")]))
    r.folds.append(mk([pred("a", "b"), pred("a", "a"), pred("b", "b")]))
    recall = per_concept_recall(r)
    assert recall == {"a": pytest.approx(200.0 / 3), "b": 50.0}


def test_reward_curve_means_over_contributing_folds():
    r = CVResult(labels=["a"])
    mk = lambda rewards: FoldResult(
        fold_index=0, mem=None, episodes=[], predictions=[],
        concept_names={}, ccr=0.0, confusion=np.zeros((1, 1)),
        confidence=np.zeros((1, 1)), rewards=rewards, queries_total=0)
    r.folds.append(mk([-1, 1, 1]))
    r.folds.append(mk([-1, -1]))
    mean, smooth, counts = r.reward_curve()
    assert np.allclose(mean, [-1.0, 0.0, 1.0])
    assert counts.tolist() == [2, 2, 1]
    assert np.allclose(smooth, smoothed_signal(np.array([-1.0, 0.0, 1.0])))


# -------------------------------------------------------------- reports


@pytest.fixture(scope="module")
def small_memory():
    cfg = tiny_net()
    demos = fake_demos(2)
    mem = memory.empty_memory(unit_stats())
    mem, _ = memory.rehearse(mem, demos, [0, 1], cfg)
    return memory.with_next_concept_id(mem, 2), demos, cfg


def test_regenerated_paths_shapes(small_memory):
    mem, demos, cfg = small_memory
    names = {0: "pat0", 1: "pat1"}
    out = regenerated_paths(mem, names)
    assert [(cid, name) for cid, name, _ in out] == [(0, "pat0"), (1, "pat1")]
    for cid, _, path in out:
        entry = mem.entries[cid]
        assert path.shape == (entry.num_steps + 1, 2)
        assert np.allclose(path[0], entry.initial_info[:2])
        assert np.all(np.isfinite(path))


def fabricate_cv(mem) -> CVResult:
    labels = ["pat0", "pat1"]
    result = CVResult(labels=labels)
    for fold_index in range(2):
        preds = [
            pred("pat0", "pat0", confidence=2.0, distance=0.05,
                 demo_id="pat0/1", entry_source="pat0/0"),
            pred("pat1", "pat0", confidence=0.5, distance=0.4,
                 demo_id="pat1/1", entry_source="pat0/0", correct=False),
        ]
        episodes = [
            EpisodeLog(episode_index=0, demo_id="pat0/0", true_concept="pat0",
                       attempts=(), outcome="new_concept", concept_label=0,
                       reward=-1, queries_total=0, train_mse=4.2e-4,
                       cluster=None, num_entries=1, num_concepts=1),
            EpisodeLog(episode_index=1, demo_id="pat1/0", true_concept="pat1",
                       attempts=(), outcome="new_concept", concept_label=1,
                       reward=1, queries_total=1, train_mse=None,
                       cluster=None, num_entries=2, num_concepts=2),
        ]
        confusion, confidence = matrices_from_predictions(preds, labels)
        result.folds.append(FoldResult(
            fold_index=fold_index, mem=mem, episodes=episodes,
            predictions=preds, concept_names={0: "pat0", 1: "pat1"},
            ccr=compute_ccr(preds), confusion=confusion,
            confidence=confidence, rewards=[e.reward for e in episodes],
            queries_total=1))
    return result


EXPECTED_FILES = [
    "ccr.csv", "confusion.csv", "confidence.csv", "predictions.csv",
    "episodes.csv", "reward.csv", "pb_embedding.csv", "summary.json",
    "reward.svg", "confusion.svg", "pb_embedding.svg", "regenerated.svg",
]


def test_write_report_bundle(tmp_path, small_memory):
    mem, demos, cfg = small_memory
    result = fabricate_cv(mem)
    out = tmp_path / "report"
    evaluation.write_report(out, result, RunConfig(seed=7))
    for name in EXPECTED_FILES:
        assert (out / name).exists(), name
    regen = sorted(os.listdir(out / "regenerated"))
    assert regen == ["concept00_pat0.csv", "concept01_pat1.csv"]
    summary = json.loads((out / "summary.json").read_text())
    assert summary["ccr_mean"] == 50.0
    assert summary["per_concept_recall"] == {"pat0": 100.0, "pat1": 0.0}
    assert summary["seed"] == 7
    ccr_lines = (out / "ccr.csv").read_text().splitlines()
    assert ccr_lines[0] == "fold,ccr,teacher_queries,episodes,entries,concepts,prototypes"
    assert len(ccr_lines) == 3
    # confusion rows with data are exactly re-normalized percentages
    conf_lines = (out / "confusion.csv").read_text().splitlines()
    for line in conf_lines[1:]:
        vals = [float(v) for v in line.split(",")[1:]]
        assert abs(sum(vals) - 100.0) < 1e-9


def test_write_report_bytes_deterministic(tmp_path, small_memory):
    mem, demos, cfg = small_memory
    result = fabricate_cv(mem)
    a, b = tmp_path / "a", tmp_path / "b"
    evaluation.write_report(a, result, RunConfig())
    evaluation.write_report(b, result, RunConfig())
    for name in EXPECTED_FILES:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_write_memory_report(tmp_path, small_memory):
    mem, demos, cfg = small_memory
    out = tmp_path / "mem_report"
    evaluation.write_memory_report(out, mem)
    lines = (out / "entries.csv").read_text().splitlines()
    assert len(lines) == 1 + mem.num_entries
    assert lines[0].startswith("entry,source,concept_label,concept_name,kind")
    assert (out / "pb_embedding.csv").exists()
    assert (out / "pb_embedding.svg").exists()
    assert (out / "regenerated.svg").exists()


def test_write_memory_report_empty(tmp_path):
    out = tmp_path / "empty_report"
    evaluation.write_memory_report(out, memory.empty_memory(unit_stats()))
    lines = (out / "entries.csv").read_text().splitlines()
    assert len(lines) == 1
    assert not (out / "pb_embedding.csv").exists()


# ------------------------------------------------------------ fold runs


def test_run_fold_end_to_end():
    cfg = RunConfig(net=tiny_net(pb_dim=3, hidden_dim=20, max_epochs=4000))
    demos = []
    rng = np.random.default_rng(4)
    for base in fake_demos(2, seed=5):
        for k in range(5):
            noise = rng.normal(0, 1e-3, base.deltas.shape)
            demos.append(evaluation.engine.replace(
                base, demo_index=k, deltas=np.clip(base.deltas + noise, 0, 1)))
    corpus = {d.demo_id: d for d in demos}
    fold = FoldSplit(
        fold_index=0,
        train=sorted(d for d in corpus if d.endswith("/0")),
        test=sorted(d for d in corpus if not d.endswith("/0")))
    labels = ["pat0", "pat1"]
    fr = evaluation.run_fold(corpus, fold, cfg, labels)
    assert len(fr.predictions) == 8
    for p in fr.predictions:
        assert p["fold"] == 0
        assert p["predicted_concept"] in labels
        assert isinstance(p["correct"], bool)
    assert fr.ccr == compute_ccr(fr.predictions)
    assert fr.confusion.shape == (2, 2)
    assert fr.queries_total == fr.episodes[-1].queries_total
    assert len(fr.rewards) == len(fr.episodes) == 2
    # near-identical held-out copies of the training patterns classify right
    assert fr.ccr == 100.0
