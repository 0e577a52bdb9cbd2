"""Complete-linkage agglomerative clustering over PB vectors.

Small exact implementation (the point sets here are tens of items, not
thousands): clusters merge bottom-up by smallest complete-linkage distance
(the maximum pointwise distance between two clusters), with ties broken by
lowest cluster-id pair so results are bit-reproducible. The merge tree is
then scanned top-down for the maximal subtrees that satisfy a caller
predicate (compactness plus whatever bookkeeping the caller layers on top).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


def pairwise_distances(points: np.ndarray) -> np.ndarray:
    """Dense symmetric Euclidean distance matrix."""
    points = np.asarray(points, dtype=float)
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


def condensed_distances(points: np.ndarray) -> np.ndarray:
    """Upper-triangle (i < j) distances as a flat vector."""
    dmat = pairwise_distances(points)
    iu = np.triu_indices(len(dmat), k=1)
    return dmat[iu]


def cutoff_distance(mean: float, std: float, k_cutoff: float) -> float:
    """Compactness cutoff: mean minus k_cutoff standard deviations."""
    return mean - k_cutoff * std


def cutoff_from_points(points: np.ndarray, k_cutoff: float) -> float:
    """Cutoff computed from all pairwise distances (population std)."""
    d = condensed_distances(points)
    if d.size == 0:
        raise ValueError("need at least 2 points for a distance cutoff")
    return cutoff_distance(float(np.mean(d)), float(np.std(d)), k_cutoff)


def mean_pairwise(dmat: np.ndarray, members) -> float:
    """Mean pairwise distance among ``members``; 0.0 for a singleton."""
    members = list(members)
    if len(members) < 2:
        return 0.0
    sub = dmat[np.ix_(members, members)]
    iu = np.triu_indices(len(members), k=1)
    return float(np.mean(sub[iu]))


@dataclass(frozen=True)
class ClusterNode:
    """Node of the merge tree; leaves carry a single point index."""

    index: int
    members: tuple
    height: float
    left: Optional[int] = None
    right: Optional[int] = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


def build_tree(points: np.ndarray) -> list:
    """Agglomerate all points; returns nodes in creation order, root last.

    Leaves occupy indices 0..n-1 with height 0; each merge appends a node
    whose height is the complete-linkage distance of the merge. Ties pick
    the lexicographically smallest (id_a, id_b) pair, so equal inputs give
    identical trees.
    """
    points = np.asarray(points, dtype=float)
    n = len(points)
    if n == 0:
        raise ValueError("cannot cluster an empty point set")
    nodes = [ClusterNode(i, (i,), 0.0) for i in range(n)]
    if n == 1:
        return nodes
    dmat = pairwise_distances(points)
    link = {}
    for i in range(n):
        for j in range(i + 1, n):
            link[(i, j)] = float(dmat[i, j])
    active = list(range(n))
    next_id = n
    while len(active) > 1:
        best_pair = None
        best_d = np.inf
        for ai in range(len(active)):
            for bi in range(ai + 1, len(active)):
                a, b = active[ai], active[bi]
                d = link[(a, b)]
                if d < best_d:
                    best_d = d
                    best_pair = (a, b)
        a, b = best_pair
        members = tuple(sorted(nodes[a].members + nodes[b].members))
        nodes.append(ClusterNode(next_id, members, best_d, a, b))
        for k in active:
            if k in (a, b):
                continue
            da = link[(min(a, k), max(a, k))]
            db = link[(min(b, k), max(b, k))]
            link[(k, next_id)] = max(da, db)
        active = [k for k in active if k not in (a, b)]
        active.append(next_id)
        next_id += 1
    return nodes


def maximal_valid(nodes: list, is_valid: Callable[[ClusterNode], bool]) -> list:
    """Top-down scan for the largest subtrees accepted by ``is_valid``.

    A node that passes is taken whole and its interior never revisited; a
    node that fails is split into its children; failing leaves are simply
    left out. Results are ordered by their member tuples.
    """
    out = []
    stack = [nodes[-1]]
    while stack:
        node = stack.pop()
        if is_valid(node):
            out.append(node)
        elif not node.is_leaf:
            stack.append(nodes[node.right])
            stack.append(nodes[node.left])
    return sorted(out, key=lambda nd: nd.members)


def medoid(dmat: np.ndarray, members) -> int:
    """Member with the smallest summed distance to the rest; ties pick the
    lowest point index."""
    members = sorted(members)
    sums = dmat[np.ix_(members, members)].sum(axis=1)
    return members[int(np.argmin(sums))]
