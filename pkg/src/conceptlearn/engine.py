"""Incremental concept learning driven by teacher feedback.

Each demonstration is one interaction episode:

1. The learner recognizes the demonstration into a PB vector and ranks
   stored entries by distance between that vector and each entry's
   recognition PB.
2. Starting from the most similar entry, it picks that entry's concept,
   executes the concept's best-reproducible pattern (lowest closed-loop
   error) and asks the teacher.
3. On approval: if the observed PB sits within the similarity threshold
   of the matched entry, the entry is merely strengthened; otherwise the
   demonstration is stored as a new exemplar of the concept (with a full
   rehearsal retrain) and the concept is checked for cluster formation.
   On rejection the concept is set aside and the next-most-similar
   untried concept is attempted; when every concept has been rejected the
   demonstration founds a new concept.

Cluster formation compresses a concept: complete-linkage subtrees that
are compact (mean pairwise PB distance under a data-driven cutoff) and
well supported (sample mass above threshold, at least one exemplar) are
replaced by their medoid entry, which absorbs the members' sample counts
and becomes a prototype.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import clustering, memory, rnnpb
from .config import EngineParams, NetConfig
from .dataset import ProcessedDemo, network_sequence
from .memory import KIND_EXEMPLAR, KIND_PROTOTYPE, Mem
from .teacher import REWARD_WRONG, TeacherOracle

OUTCOME_STRENGTHENED = "strengthened"
OUTCOME_NEW_EXEMPLAR = "new_exemplar"
OUTCOME_NEW_CONCEPT = "new_concept"


@dataclass(frozen=True)
class AttemptLog:
    """One teacher query inside an episode."""

    concept_label: int
    matched_source: str
    executed_source: str
    feedback: int


@dataclass(frozen=True)
class ClusterLog:
    """What cluster formation did to one concept."""

    concept_label: int
    promoted_sources: tuple
    substitutions: tuple  # ((medoid_source, (removed_source, ...)), ...)
    retrained: bool
    train_mse: Optional[float]


@dataclass(frozen=True)
class EpisodeLog:
    episode_index: int
    demo_id: str
    true_concept: str
    attempts: tuple
    outcome: str
    concept_label: int
    reward: int
    queries_total: int
    train_mse: Optional[float]
    cluster: Optional[ClusterLog]
    num_entries: int
    num_concepts: int


def best_action_index(mem: Mem, concept_label: int) -> int:
    """Entry the learner would execute for a concept: the one whose
    regeneration tracked its targets best (ties pick the oldest entry)."""
    pairs = mem.entries_of(concept_label)
    if not pairs:
        raise ValueError(f"concept {concept_label} has no entries")
    best_i, best_err = pairs[0][0], pairs[0][1].generation_error
    for i, e in pairs[1:]:
        if e.generation_error < best_err:
            best_i, best_err = i, e.generation_error
    return best_i


def observation_distances(mem: Mem, pb_obs: np.ndarray) -> np.ndarray:
    """Distance from an observed PB to every entry's recognition PB."""
    recs = np.array([e.pb_rec for e in mem.entries])
    return np.sqrt(np.sum((recs - pb_obs[None, :]) ** 2, axis=1))


def _new_concept(mem: Mem, demo: ProcessedDemo, cfg: NetConfig):
    label = mem.next_concept_id
    new_mem, mse = memory.rehearse(mem, [demo], [label], cfg)
    return memory.with_next_concept_id(new_mem, label + 1), label, mse


def maybe_cluster(mem: Mem, concept_label: int, params: EngineParams,
                  cfg: NetConfig):
    """Try to compress one concept; returns (mem, ClusterLog or None).

    Runs only when the concept holds at least two entries. A merge-tree
    subtree qualifies when its summed sample count exceeds the support
    threshold, it contains at least one exemplar, and its mean pairwise PB
    distance is under ``mean - k_cutoff * std`` of all pairwise distances
    within the concept. Each maximal qualifying subtree collapses to its
    medoid; if any collapse removed entries, the network is re-anchored
    with a rehearsal pass over the survivors.
    """
    pairs = mem.entries_of(concept_label)
    if len(pairs) < 2:
        return mem, None
    indices = [i for i, _ in pairs]
    entries = [e for _, e in pairs]
    points = np.array([e.pb for e in entries])
    dmat = clustering.pairwise_distances(points)
    cutoff = clustering.cutoff_from_points(points, params.k_cutoff)
    nodes = clustering.build_tree(points)

    def qualifies(node):
        members = list(node.members)
        total = sum(entries[m].num_samples for m in members)
        if total <= params.num_threshold:
            return False
        if not any(entries[m].kind == KIND_EXEMPLAR for m in members):
            return False
        return clustering.mean_pairwise(dmat, members) < cutoff

    subtrees = clustering.maximal_valid(nodes, qualifies)
    if not subtrees:
        return mem, None

    promoted = []
    substitutions = []
    removed_global = set()
    medoid_updates = {}
    for node in subtrees:
        members = list(node.members)
        med_local = clustering.medoid(dmat, members)
        med_global = indices[med_local]
        total = sum(entries[m].num_samples for m in members)
        medoid_updates[med_global] = total
        others = [m for m in members if m != med_local]
        if others:
            removed = tuple(entries[m].source_id for m in others)
            removed_global.update(indices[m] for m in others)
            substitutions.append((entries[med_local].source_id, removed))
        else:
            promoted.append(entries[med_local].source_id)

    new_entries = []
    for i, e in enumerate(mem.entries):
        if i in removed_global:
            continue
        if i in medoid_updates:
            e = replace(e, kind=KIND_PROTOTYPE, num_samples=medoid_updates[i])
        new_entries.append(e)
    new_mem = memory.with_entries(mem, new_entries)

    retrained = bool(removed_global)
    mse = None
    if retrained:
        new_mem, mse = memory.rehearse(new_mem, [], [], cfg)
    log = ClusterLog(concept_label=concept_label,
                     promoted_sources=tuple(promoted),
                     substitutions=tuple(substitutions),
                     retrained=retrained, train_mse=mse)
    return new_mem, log


def process_episode(mem: Mem, demo: ProcessedDemo, teacher: TeacherOracle,
                    cfg: NetConfig, params: EngineParams,
                    episode_index: int = 0):
    """Run one demonstration through the interaction loop."""
    if mem.num_entries == 0:
        new_mem, label, mse = _new_concept(mem, demo, cfg)
        log = EpisodeLog(
            episode_index=episode_index, demo_id=demo.demo_id,
            true_concept=demo.concept_label, attempts=(),
            outcome=OUTCOME_NEW_CONCEPT, concept_label=label,
            reward=REWARD_WRONG, queries_total=teacher.queries,
            train_mse=mse, cluster=None, num_entries=new_mem.num_entries,
            num_concepts=len(new_mem.concept_ids))
        return new_mem, log

    seq = network_sequence(demo, mem.stats)
    pb_obs, _ = rnnpb.recognize(mem.weights, seq, cfg)
    dists = observation_distances(mem, pb_obs)
    order = np.argsort(dists, kind="stable")

    attempts = []
    tried = set()
    result = None
    for idx in order:
        idx = int(idx)
        entry = mem.entries[idx]
        concept = entry.concept_label
        if concept in tried:
            continue
        exec_idx = best_action_index(mem, concept)
        fb = teacher.feedback(demo, mem.entries[exec_idx])
        attempts.append(AttemptLog(
            concept_label=concept, matched_source=entry.source_id,
            executed_source=mem.entries[exec_idx].source_id, feedback=fb))
        if fb > 0:
            result = (idx, concept)
            break
        tried.add(concept)

    cluster_log = None
    if result is None:
        new_mem, label, mse = _new_concept(mem, demo, cfg)
        outcome = OUTCOME_NEW_CONCEPT
    else:
        idx, label = result
        if float(dists[idx]) <= params.similarity_threshold:
            new_mem = memory.bump_samples(mem, idx)
            outcome = OUTCOME_STRENGTHENED
            mse = None
        else:
            new_mem, mse = memory.rehearse(mem, [demo], [label], cfg)
            new_mem, cluster_log = maybe_cluster(new_mem, label, params, cfg)
            outcome = OUTCOME_NEW_EXEMPLAR

    reward = attempts[0].feedback if attempts else REWARD_WRONG
    log = EpisodeLog(
        episode_index=episode_index, demo_id=demo.demo_id,
        true_concept=demo.concept_label, attempts=tuple(attempts),
        outcome=outcome, concept_label=label, reward=reward,
        queries_total=teacher.queries, train_mse=mse, cluster=cluster_log,
        num_entries=new_mem.num_entries,
        num_concepts=len(new_mem.concept_ids))
    return new_mem, log


def run_training(demos, stats, teacher: TeacherOracle, cfg: NetConfig,
                 params: EngineParams, seed: int):
    """Present demonstrations in a seeded shuffle; returns (mem, logs)."""
    demos = sorted(demos, key=lambda d: d.demo_id)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(demos))
    mem = memory.empty_memory(stats)
    logs = []
    for k, di in enumerate(order):
        mem, log = process_episode(mem, demos[int(di)], teacher, cfg, params,
                                   episode_index=k)
        logs.append(log)
    return mem, logs


def concept_purity_map(mem: Mem) -> dict:
    """Learner concept id -> dominant true concept (majority, ties by name).

    With a consistent teacher every concept is pure; the majority rule only
    matters if an inconsistent grader was used.
    """
    out = {}
    for cid in mem.concept_ids:
        names = [e.true_concept for _, e in mem.entries_of(cid)]
        counts = {}
        for nm in names:
            counts[nm] = counts.get(nm, 0) + 1
        best = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
        out[cid] = best
    return out


def infer(mem: Mem, demos, cfg: NetConfig):
    """Batch recognition of unseen demonstrations against memory.

    Returns a list of dicts, one per demonstration (in the given order):
    predicted learner concept, nearest entry, distance to it, and the
    confidence ratio d2/d1 - 1 where d2 is the nearest entry of any other
    concept (capped when the match is exact or no other concept exists).
    """
    if mem.num_entries == 0:
        raise ValueError("cannot infer with an empty memory")
    cap = 1e6
    seqs = [network_sequence(d, mem.stats) for d in demos]
    pbs, residuals = rnnpb.recognize_batch(mem.weights, seqs, cfg)
    recs = np.array([e.pb_rec for e in mem.entries])
    labels = np.array([e.concept_label for e in mem.entries])
    out = []
    for i, demo in enumerate(demos):
        d = np.sqrt(np.sum((recs - pbs[i][None, :]) ** 2, axis=1))
        nearest = int(np.argmin(d))
        concept = int(labels[nearest])
        d1 = float(d[nearest])
        other = d[labels != concept]
        if other.size == 0 or d1 == 0.0:
            confidence = cap
        else:
            confidence = min(float(np.min(other)) / d1 - 1.0, cap)
        out.append({
            "demo_id": demo.demo_id,
            "true_concept": demo.concept_label,
            "concept_label": concept,
            "entry_index": nearest,
            "entry_source": mem.entries[nearest].source_id,
            "distance": d1,
            "confidence": confidence,
            "residual": float(residuals[i]),
            "pb": pbs[i],
        })
    return out
