"""Corpus IO, preprocessing geometry, normalization and fold splitting."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conceptlearn import dataset
from conceptlearn.config import PreprocessConfig, RunConfig, WorkspaceRect
from conceptlearn.errors import (
    ConfigError,
    CorpusError,
    CorpusParseError,
    DegenerateInputError,
)

RUN = RunConfig()


# ------------------------------------------------------------------- IO


def test_load_label_map(tmp_path):
    p = tmp_path / "labels.csv"
    p.write_text("shape,concept\nA,first\nB,first\nC,second\n")
    assert dataset.load_label_map(p) == {"A": "first", "B": "first", "C": "second"}


@pytest.mark.parametrize(
    "body",
    [
        "wrong,header\nA,x\n",
        "shape,concept\nA,\n",
        "shape,concept\nA,x\nA,y\n",
        "shape,concept\n",
    ],
)
def test_label_map_rejects(tmp_path, body):
    p = tmp_path / "labels.csv"
    p.write_text(body)
    with pytest.raises(ConfigError):
        dataset.load_label_map(p)


def test_shape_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    demos = [rng.normal(size=(20, 2)), rng.normal(size=(15, 2))]
    f = tmp_path / "S.csv"
    dataset.write_shape_csv(f, demos)
    loaded = dataset._read_shape_file(f, "S")
    assert [t.demo_index for t in loaded] == [0, 1]
    for t, orig in zip(loaded, demos):
        assert np.array_equal(t.points, orig)


def test_load_corpus_missing_shape(tmp_path):
    dataset.write_shape_csv(tmp_path / "A.csv", [np.zeros((5, 2))])
    with pytest.raises(CorpusError, match="missing corpus file"):
        dataset.load_corpus(tmp_path, {"A": "x", "B": "y"})


def test_load_corpus_missing_dir(tmp_path):
    with pytest.raises(CorpusError, match="directory"):
        dataset.load_corpus(tmp_path / "nope", {"A": "x"})


@pytest.mark.parametrize(
    "body,msg",
    [
        ("demo,t,y\n", "header"),
        ("demo,t,y,z\n0,0,1,abc\n", "non-numeric"),
        ("demo,t,y,z\n0,0,1,inf\n", "non-finite"),
        ("demo,t,y,z\n0,1,0,0\n0,0,1,1\n", "sorted"),
        ("demo,t,y,z\n0,0,1,1,9\n", "4 fields"),
    ],
)
def test_shape_file_parse_errors(tmp_path, body, msg):
    f = tmp_path / "S.csv"
    f.write_text(body)
    with pytest.raises(CorpusParseError, match=msg) as exc_info:
        dataset._read_shape_file(f, "S")
    assert str(f) in str(exc_info.value)


def test_shape_file_single_point_demo(tmp_path):
    f = tmp_path / "S.csv"
    f.write_text("demo,t,y,z\n0,0,1.0,1.0\n")
    with pytest.raises(CorpusError, match="fewer than 2"):
        dataset._read_shape_file(f, "S")


# ------------------------------------------------------------- geometry


def test_smooth_path_window_one_is_identity():
    pts = np.random.default_rng(1).normal(size=(9, 2))
    assert np.array_equal(dataset.smooth_path(pts, 1), pts)


def test_smooth_path_matches_naive():
    pts = np.random.default_rng(2).normal(size=(11, 2))
    window = 5
    got = dataset.smooth_path(pts, window)
    for i in range(11):
        lo = max(i - 2, 0)
        hi = min(i + 3, 11)
        assert np.allclose(got[i], pts[lo:hi].mean(axis=0))


def test_smooth_preserves_straight_line():
    t = np.linspace(0, 1, 20)[:, None]
    pts = np.hstack([t, 2 * t])
    sm = dataset.smooth_path(pts, 7)
    # collinear points stay collinear under averaging
    assert np.allclose(sm[:, 1], 2 * sm[:, 0])


def test_resample_uniform_spacing():
    # dense half circle: chord length ~ arc length, spacing must even out
    t = np.linspace(0, np.pi, 400) ** 1.5 / np.pi ** 0.5  # non-uniform parameter
    pts = np.stack([np.cos(t), np.sin(t)], axis=1)
    out = dataset.resample_arclength(pts, 25)
    assert out.shape == (25, 2)
    assert np.allclose(out[0], pts[0])
    assert np.allclose(out[-1], pts[-1])
    seg = np.linalg.norm(np.diff(out, axis=0), axis=1)
    assert seg.max() - seg.min() < 0.01 * seg.mean()


def test_resample_drops_repeated_points():
    pts = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    out = dataset.resample_arclength(pts, 5)
    assert np.allclose(out[:, 0], np.linspace(0, 2, 5))


def test_resample_degenerate():
    pts = np.zeros((6, 2))
    with pytest.raises(DegenerateInputError):
        dataset.resample_arclength(pts, 5)


def test_fit_to_workspace_bounds_and_aspect():
    rect = WorkspaceRect()
    rng = np.random.default_rng(4)
    pts = rng.normal(size=(30, 2)) * [3.0, 1.0] + [100.0, -50.0]
    out = dataset.fit_to_workspace(pts, rect)
    assert out[:, 0].min() >= rect.y_min - 1e-9
    assert out[:, 0].max() <= rect.y_max + 1e-9
    assert out[:, 1].min() >= rect.z_min - 1e-9
    assert out[:, 1].max() <= rect.z_max + 1e-9
    # isotropic: pairwise distance ratios preserved
    d_in = np.linalg.norm(pts[0] - pts[1])
    d_out = np.linalg.norm(out[0] - out[1])
    d_in2 = np.linalg.norm(pts[2] - pts[3])
    d_out2 = np.linalg.norm(out[2] - out[3])
    assert d_out / d_in == pytest.approx(d_out2 / d_in2)
    # at least one axis fills the rectangle
    spans = out.max(axis=0) - out.min(axis=0)
    assert max(spans[0] / rect.width, spans[1] / rect.height) == pytest.approx(1.0)


def test_fit_to_workspace_degenerate():
    with pytest.raises(DegenerateInputError):
        dataset.fit_to_workspace(np.ones((4, 2)), WorkspaceRect())


def test_preprocess_consistent_shapes(toy_corpus):
    demos, _ = toy_corpus
    for d in demos:
        assert d.initial_info.shape == (6,)
        assert d.deltas.shape == (49, 6)
        assert d.num_steps == 49
        assert d.sensory_deltas.shape == (49, 2)
        assert d.motor_deltas.shape == (49, 4)


def test_preprocess_deltas_reconstruct_workspace_path(toy_corpus):
    demos, _ = toy_corpus
    d = demos[0]
    pos, q = dataset.reconstruct_path(d.initial_info, d.deltas)
    rect = RUN.workspace
    assert pos[:, 0].min() >= rect.y_min - 1e-6
    assert pos[:, 0].max() <= rect.y_max + 1e-6
    assert q.shape == (50, 4)


# -------------------------------------------------------- normalization


def test_normalization_range_and_roundtrip(toy_corpus):
    demos, stats = toy_corpus
    for d in demos:
        n = stats.normalize_deltas(d.deltas)
        assert n.min() >= dataset.NETWORK_LO - 1e-12
        assert n.max() <= dataset.NETWORK_HI + 1e-12
        back = stats.denormalize_deltas(n)
        assert np.allclose(back, d.deltas, atol=1e-12)


def test_normalization_zero_span_channel():
    d0 = dataset.ProcessedDemo(
        shape_name="s",
        demo_index=0,
        concept_label="c",
        initial_info=np.zeros(6),
        deltas=np.tile([1.0, 2.0, 0.5, 0.5, 0.5, 0.5], (4, 1)),
    )
    stats = dataset.compute_normalization([d0])
    n = stats.normalize_deltas(d0.deltas)
    # constant channels pin to the band midpoint
    assert np.allclose(n, 0.5)
    assert np.allclose(stats.denormalize_deltas(n), d0.deltas)


def test_normalization_empty():
    with pytest.raises(ConfigError):
        dataset.compute_normalization([])


def test_network_sequence_layout(toy_corpus):
    demos, stats = toy_corpus
    d = demos[0]
    seq = dataset.network_sequence(d, stats)
    assert seq.shape == (50, 6)
    assert np.array_equal(seq[0], stats.normalize_init(d.initial_info))
    assert np.array_equal(seq[1:], stats.normalize_deltas(d.deltas))


# ---------------------------------------------------------------- folds


def test_make_folds_partition(toy_corpus):
    demos, _ = toy_corpus
    folds = dataset.make_folds(demos, seed=7)
    assert len(folds) == 5
    all_ids = sorted(d.demo_id for d in demos)
    for f in folds:
        assert sorted(f.train + f.test) == all_ids
        assert not set(f.train) & set(f.test)
        # every shape contributes at least one training demo
        shapes = {i.rsplit("/", 1)[0] for i in f.train}
        assert shapes == {"arch", "wave", "zig"}
    # the five training partitions tile the corpus
    train_union = sorted(i for f in folds for i in f.train)
    assert train_union == all_ids


def test_make_folds_deterministic(toy_corpus):
    demos, _ = toy_corpus
    a = dataset.make_folds(demos, seed=7)
    b = dataset.make_folds(list(reversed(demos)), seed=7)
    assert a == b
    c = dataset.make_folds(demos, seed=8)
    assert a != c


def test_make_folds_too_few_demos(toy_corpus):
    demos, _ = toy_corpus
    subset = [d for d in demos if d.demo_index < 4]
    with pytest.raises(ConfigError, match="five-fold"):
        dataset.make_folds(subset, seed=7)


def test_dump_folds_format(toy_corpus):
    import json

    demos, _ = toy_corpus
    folds = dataset.make_folds(demos, seed=7)
    payload = json.loads(dataset.dump_folds(folds))
    assert [rec["fold_index"] for rec in payload] == [0, 1, 2, 3, 4]
    for rec in payload:
        # each fold lists every demo exactly once, as train or test
        assert sorted(rec["train"] + rec["test"]) == sorted(d.demo_id for d in demos)


# ---------------------------------------------------------------- cache


def test_processed_corpus_cache_roundtrip(tmp_path, toy_corpus):
    demos, stats = toy_corpus
    p = tmp_path / "cache.bin"
    dataset.save_processed_corpus(p, demos, stats, RUN.preprocess)
    demos2, stats2, pp2 = dataset.load_processed_corpus(p)
    assert pp2 == RUN.preprocess
    assert np.array_equal(stats2.delta_lo, stats.delta_lo)
    assert np.array_equal(stats2.init_hi, stats.init_hi)
    assert len(demos2) == len(demos)
    for a, b in zip(demos, demos2):
        assert a.demo_id == b.demo_id
        assert a.concept_label == b.concept_label
        assert np.array_equal(a.initial_info, b.initial_info)
        assert np.array_equal(a.deltas, b.deltas)
