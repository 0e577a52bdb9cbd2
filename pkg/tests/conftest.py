"""Shared fixtures: tiny network configs and a cached toy corpus.

Most tests run on deliberately small networks (a dozen hidden units, short
sequences) so the whole suite stays fast; the acceptance tests in
test_acceptance.py use the real sizes.
"""

import numpy as np
import pytest
from hypothesis import settings

from conceptlearn.config import (
    NetConfig,
    PreprocessConfig,
    RunConfig,
)
from conceptlearn import dataset

settings.register_profile("ci", deadline=None, max_examples=25)
settings.load_profile("ci")

ROOT = __file__.rsplit("/tests/", 1)[0]


def tiny_net(**overrides) -> NetConfig:
    """Small, fast network used by unit tests."""
    base = dict(
        io_dim=6,
        pb_dim=2,
        context_dim=6,
        hidden_dim=14,
        learn_rate_w=2.0,
        learn_rate_pb=5.0,
        momentum=0.9,
        feedback_blend=0.6,
        blend_ramp_epochs=150,
        max_epochs=2500,
        target_mse=2e-3,
        recog_iters=120,
        recog_blend=0.4,
        rng_seed=11,
    )
    base.update(overrides)
    return NetConfig(**base)


def toy_sequences(n=3, steps=12, io_dim=6, seed=5):
    """Smooth random sequences in the network's (0.1, 0.9) operating band."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        freq = rng.uniform(0.5, 2.0, io_dim)
        phase = rng.uniform(0, 2 * np.pi, io_dim)
        t = np.linspace(0, 2 * np.pi, steps)[:, None]
        out.append(0.5 + 0.3 * np.sin(freq * t + phase))
    return out


def unit_stats(io_dim=6):
    """Stats whose [0, 1] -> [0.1, 0.9] mapping keeps fabricated rows in band."""
    zeros = np.zeros(io_dim)
    ones = np.ones(io_dim)
    return dataset.NormalizationStats(delta_lo=zeros, delta_hi=ones,
                                      init_lo=zeros, init_hi=ones)


def fake_demos(n, steps=13, seed=5, name="pat"):
    """Short smooth patterns wrapped as processed demonstrations."""
    rows = toy_sequences(n=n, steps=steps + 1, seed=seed)
    out = []
    for k, r in enumerate(rows):
        out.append(dataset.ProcessedDemo(
            shape_name=f"{name}{k}", demo_index=0, concept_label=f"{name}{k}",
            initial_info=r[0].copy(), deltas=r[1:].copy()))
    return out


@pytest.fixture(scope="session")
def toy_corpus():
    """Preprocessed toy corpus (3 shapes x 6 demos, 50-step sequences)."""
    run = RunConfig(preprocess=PreprocessConfig(resample_len=50))
    labels = dataset.load_label_map(f"{ROOT}/data/toy_concepts.csv")
    raw = dataset.load_corpus(f"{ROOT}/data/toy", labels)
    demos, stats = dataset.preprocess_corpus(
        raw, labels, run.preprocess, run.arm, run.workspace
    )
    return demos, stats


@pytest.fixture(scope="session")
def toy_by_id(toy_corpus):
    demos, _ = toy_corpus
    return {d.demo_id: d for d in demos}


def make_mini_corpus(root, shapes=("up", "loop"), demos=5):
    """Two small shapes with jittered repeats, plus labels and a config."""
    data = root / "data"
    data.mkdir()
    t = np.linspace(0.0, 1.0, 40)
    base = {
        "up": np.stack([t * 8.0, np.sin(t * np.pi) * 3.0], axis=1),
        "loop": np.stack([np.cos(t * 4.0) * (4.0 - 2.0 * t),
                          np.sin(t * 4.0) * (4.0 - 2.0 * t)], axis=1),
    }
    rng = np.random.default_rng(13)
    for shape in shapes:
        copies = [base[shape] + rng.normal(0.0, 0.01, base[shape].shape)
                  for _ in range(demos)]
        dataset.write_shape_csv(data / f"{shape}.csv", copies)
    labels = root / "labels.csv"
    labels.write_text("shape,concept\n"
                      + "".join(f"{s},{s}\n" for s in sorted(shapes)),
                      encoding="utf-8")
    ini = root / "run.ini"
    ini.write_text(f"""\
[run]
corpus_dir = {data}
label_map = {labels}
out_dir = {root / 'out'}
seed = 3

[preprocess]
smooth_window = 3
resample_len = 20

[network]
pb_dim = 3
context_dim = 6
hidden_dim = 20
learn_rate_w = 2.0
learn_rate_pb = 5.0
momentum = 0.9
feedback_blend = 0.6
blend_ramp_epochs = 150
max_epochs = 4000
target_mse = 0.002
recog_iters = 120
recog_blend = 0.4
rng_seed = 11
""", encoding="utf-8")
    return ini


@pytest.fixture(scope="session")
def mini_corpus_ini(tmp_path_factory):
    root = tmp_path_factory.mktemp("mini_shared")
    return make_mini_corpus(root)
