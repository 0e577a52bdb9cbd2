"""Pattern memory: one shared network plus per-pattern bookkeeping.

Each remembered pattern is a ``MemEntry``: the PB vector it was trained
under, the PB vector recovered by recognizing its own regeneration, sample
counts, the physical initial configuration, and quality numbers. The
memory never stores raw training sequences; when new demonstrations
arrive, every stored pattern is first regenerated from the current
network (pseudo-rehearsal) and the network is retrained on regenerations
plus newcomers together, which is what protects old patterns from being
overwritten.

All mutating operations are pure: they return a new ``Mem`` and leave the
input untouched, so a failed retrain cannot corrupt the caller's state.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import rnnpb
from .config import NetConfig
from .dataset import NormalizationStats, ProcessedDemo, network_sequence
from .errors import RehearsalError, SnapshotError
from .rnnpb import NetWeights
from .serialization import read_container, write_container

KIND_EXEMPLAR = "exemplar"
KIND_PROTOTYPE = "prototype"

MEMORY_FORMAT = "pattern-memory"
MEMORY_VERSION = 1


@dataclass(frozen=True)
class MemEntry:
    """One remembered pattern.

    ``pb`` is the vector the pattern was trained under; ``pb_rec`` is the
    vector recovered by recognizing the pattern's own regeneration with the
    current weights (the self-consistency reference). ``concept_label`` is
    the learner's own concept id; ``true_concept`` is provenance carried
    for grading and reporting only -- the learner never branches on it.
    """

    pb: np.ndarray
    pb_rec: np.ndarray
    num_samples: int
    num_steps: int
    initial_info: np.ndarray
    concept_label: int
    true_concept: str
    source_id: str
    generation_error: float
    kind: str = KIND_EXEMPLAR


@dataclass(frozen=True)
class Mem:
    weights: Optional[NetWeights]
    entries: tuple
    stats: NormalizationStats
    next_concept_id: int = 0

    @property
    def num_entries(self) -> int:
        return len(self.entries)

    @property
    def num_prototypes(self) -> int:
        return sum(1 for e in self.entries if e.kind == KIND_PROTOTYPE)

    @property
    def concept_ids(self) -> list:
        return sorted({e.concept_label for e in self.entries})

    def entries_of(self, concept_label: int) -> list:
        """(index, entry) pairs for one concept, in memory order."""
        return [(i, e) for i, e in enumerate(self.entries)
                if e.concept_label == concept_label]


def empty_memory(stats: NormalizationStats) -> Mem:
    return Mem(weights=None, entries=(), stats=stats, next_concept_id=0)


def _entry_x0(entry: MemEntry, stats: NormalizationStats) -> np.ndarray:
    return stats.normalize_init(entry.initial_info)


def regenerate(mem: Mem, entry: MemEntry) -> np.ndarray:
    """Closed-loop rollout of one entry: (num_steps, io_dim) rows."""
    return rnnpb.generate(mem.weights, entry.pb, _entry_x0(entry, mem.stats),
                          entry.num_steps)


def regenerate_sequence(mem: Mem, entry: MemEntry) -> np.ndarray:
    """Full training matrix for an entry: initial row plus regeneration."""
    x0 = _entry_x0(entry, mem.stats)
    return np.vstack([x0[None, :], regenerate(mem, entry)])


def recognized_pbs(mem: Mem, cfg: NetConfig) -> np.ndarray:
    """Recognition PBs of every entry's regeneration, one batch in entry
    order (the reference computation for each entry's ``pb_rec``)."""
    seqs = [regenerate_sequence(mem, e) for e in mem.entries]
    pbs, _ = rnnpb.recognize_batch(mem.weights, seqs, cfg)
    return pbs


def _logit(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 1e-12, 1.0 - 1e-12)
    return np.log(p / (1.0 - p))


def rehearse(mem: Mem, new_demos, concept_labels, cfg: NetConfig):
    """Fold new demonstrations into memory; returns (new Mem, final mse).

    Every stored entry is regenerated with the current weights and those
    regenerations join the new demonstrations as one training batch; the
    network retrains from its current weights (fresh ones only when the
    memory is empty). Stored entries warm-start their PB potentials, new
    patterns start neutral. Afterwards every pattern's entry is rebuilt:
    new PB, recognition PB of its fresh regeneration, and the closed-loop
    error against the rows it was just trained on.
    """
    if len(new_demos) != len(concept_labels):
        raise ValueError("one concept label per new demonstration")
    if not new_demos and not mem.entries:
        raise ValueError("nothing to rehearse")
    if mem.entries:
        w0 = mem.weights
        old_seqs = [regenerate_sequence(mem, e) for e in mem.entries]
        if not all(np.all(np.isfinite(s)) for s in old_seqs):
            raise RehearsalError("stored patterns regenerate to non-finite rows")
        old_u = _logit(np.array([e.pb for e in mem.entries]))
    else:
        w0 = rnnpb.init_weights(cfg)
        old_seqs = []
        old_u = np.zeros((0, cfg.pb_dim))
    new_seqs = [network_sequence(d, mem.stats) for d in new_demos]
    seqs = old_seqs + new_seqs
    u0 = np.vstack([old_u, np.zeros((len(new_seqs), cfg.pb_dim))])
    try:
        w_new, pbs, final_mse = rnnpb.train(w0, seqs, u0, cfg)
    except rnnpb.DivergenceError as exc:
        raise RehearsalError(str(exc), exc.epoch, exc.learn_rate_w,
                             exc.learn_rate_pb) from exc

    # Rebuild all entries against the retrained network.
    x0_rows = [s[0] for s in seqs]
    steps = [s.shape[0] - 1 for s in seqs]
    rollouts = [rnnpb.generate(w_new, pbs[i], x0_rows[i], steps[i])
                for i in range(len(seqs))]
    recog_seqs = [np.vstack([x0_rows[i][None, :], rollouts[i]])
                  for i in range(len(seqs))]
    pb_recs, _ = rnnpb.recognize_batch(w_new, recog_seqs, cfg)
    gen_errors = [float(np.mean((rollouts[i] - seqs[i][1:]) ** 2))
                  for i in range(len(seqs))]

    entries = []
    for i, e in enumerate(mem.entries):
        entries.append(replace(
            e, pb=pbs[i].copy(), pb_rec=pb_recs[i].copy(),
            generation_error=gen_errors[i]))
    for j, demo in enumerate(new_demos):
        i = len(mem.entries) + j
        entries.append(MemEntry(
            pb=pbs[i].copy(), pb_rec=pb_recs[i].copy(), num_samples=1,
            num_steps=steps[i], initial_info=demo.initial_info.copy(),
            concept_label=int(concept_labels[j]),
            true_concept=demo.concept_label, source_id=demo.demo_id,
            generation_error=gen_errors[i]))
    new_mem = Mem(weights=w_new, entries=tuple(entries), stats=mem.stats,
                  next_concept_id=mem.next_concept_id)
    return new_mem, final_mse


def bump_samples(mem: Mem, index: int, amount: int = 1) -> Mem:
    """Strengthen one entry without touching the network."""
    entries = list(mem.entries)
    e = entries[index]
    entries[index] = replace(e, num_samples=e.num_samples + amount)
    return replace(mem, entries=tuple(entries))


def with_entries(mem: Mem, entries) -> Mem:
    return replace(mem, entries=tuple(entries))


def with_next_concept_id(mem: Mem, next_id: int) -> Mem:
    return replace(mem, next_concept_id=next_id)


def save_memory(path, mem: Mem, meta_extra: Optional[dict] = None) -> None:
    """Snapshot memory to the deterministic container format."""
    n = len(mem.entries)
    pb_dim = mem.weights.pb_dim if mem.weights is not None else 0
    arrays = []
    has_weights = mem.weights is not None
    if has_weights:
        for name, arr in zip(
                ("w_in", "b_h", "w_out", "b_out", "w_ctx", "b_ctx"),
                mem.weights.as_tuple()):
            arrays.append((name, arr))
    arrays.extend([
        ("pb", np.array([e.pb for e in mem.entries]).reshape(n, pb_dim)),
        ("pb_rec", np.array([e.pb_rec for e in mem.entries]).reshape(n, pb_dim)),
        ("initial_info", np.array([e.initial_info for e in mem.entries]).reshape(
            n, mem.stats.init_lo.shape[0])),
        ("num_samples", np.array([e.num_samples for e in mem.entries],
                                 dtype=np.int64)),
        ("num_steps", np.array([e.num_steps for e in mem.entries],
                               dtype=np.int64)),
        ("concept_label", np.array([e.concept_label for e in mem.entries],
                                   dtype=np.int64)),
        ("generation_error", np.array([e.generation_error for e in mem.entries])),
        ("delta_lo", mem.stats.delta_lo),
        ("delta_hi", mem.stats.delta_hi),
        ("init_lo", mem.stats.init_lo),
        ("init_hi", mem.stats.init_hi),
    ])
    meta = {
        "has_weights": has_weights,
        "next_concept_id": mem.next_concept_id,
        "kinds": [e.kind for e in mem.entries],
        "true_concepts": [e.true_concept for e in mem.entries],
        "source_ids": [e.source_id for e in mem.entries],
    }
    if meta_extra:
        meta.update(meta_extra)
    write_container(path, MEMORY_FORMAT, MEMORY_VERSION, meta, arrays)


def load_memory(path) -> Mem:
    meta, arrays = read_container(path, MEMORY_FORMAT, MEMORY_VERSION)
    stats = NormalizationStats(
        delta_lo=arrays["delta_lo"], delta_hi=arrays["delta_hi"],
        init_lo=arrays["init_lo"], init_hi=arrays["init_hi"])
    weights = None
    if meta["has_weights"]:
        weights = NetWeights(arrays["w_in"], arrays["b_h"], arrays["w_out"],
                             arrays["b_out"], arrays["w_ctx"], arrays["b_ctx"])
    n = arrays["pb"].shape[0]
    kinds = meta["kinds"]
    true_concepts = meta["true_concepts"]
    source_ids = meta["source_ids"]
    if not (len(kinds) == len(true_concepts) == len(source_ids) == n):
        raise SnapshotError(f"{path}: entry metadata does not match arrays")
    entries = []
    for i in range(n):
        entries.append(MemEntry(
            pb=arrays["pb"][i], pb_rec=arrays["pb_rec"][i],
            num_samples=int(arrays["num_samples"][i]),
            num_steps=int(arrays["num_steps"][i]),
            initial_info=arrays["initial_info"][i],
            concept_label=int(arrays["concept_label"][i]),
            true_concept=true_concepts[i], source_id=source_ids[i],
            generation_error=float(arrays["generation_error"][i]),
            kind=kinds[i]))
    return Mem(weights=weights, entries=tuple(entries), stats=stats,
               next_concept_id=int(meta["next_concept_id"]))
