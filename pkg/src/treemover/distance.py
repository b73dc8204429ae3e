"""Tree mover's distance between attributed graphs.

The distance unrolls each graph into depth-L computation trees (one per
node), measures tree pairs with a recursive transport distance, and couples
the two tree multisets with one final transport step. Everything here works
on a dynamic-programming table indexed by node pairs, so the trees are never
materialised; `trees.naive_tmd` is the literal recursive evaluator kept as a
cross-check.

For depth-k trees the pair distance is

    dist_k(u, v) = ||x_u - x_v|| + w(k-1) * OT(children(u), children(v))

where the children OT uses dist_{k-1} entries, pads the smaller neighbour
multiset with blank trees (all-zero features, no children), and prices a
real tree against a blank at that tree's norm. Mode "mean" divides every
transport value by the padded multiset size.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .graphs import graph_key
from .ot import _augmented_cost
from .schedule import TmdConfig


@dataclass(frozen=True)
class DistanceTable:
    """Pairwise tree distances at one depth.

    dist has shape (n_a + 1, n_b + 1): entry [u, v] is the distance between
    the depth-`depth` trees rooted at u and v, the last column holds the
    a-side tree norms (distance to the blank tree), the last row the b-side
    norms, and the corner is 0.
    """

    depth: int
    dist: np.ndarray

    @property
    def norms_a(self):
        return self.dist[:-1, -1]

    @property
    def norms_b(self):
        return self.dist[-1, :-1]


def _warn_zero_features(g):
    if g.node_count and not np.all(np.any(g.features != 0.0, axis=1)):
        warnings.warn(
            "graph contains all-zero feature vectors; they are indistinguishable "
            "from padding blanks at depth 1",
            RuntimeWarning,
            stacklevel=3,
        )


def _neighbor_arrays(g):
    return [np.asarray(nb, dtype=np.intp) for nb in g.neighbors]


def build_distance_tables(ga, gb, cfg):
    """All DistanceTables for depths 1..cfg.depth between two graphs."""
    if ga.feature_dim != gb.feature_dim:
        raise ValueError(
            f"feature dimensions differ: {ga.feature_dim} vs {gb.feature_dim}"
        )
    _warn_zero_features(ga)
    _warn_zero_features(gb)
    na, nb = ga.node_count, gb.node_count
    mean = cfg.mode == "mean"
    base = cdist(ga.features, gb.features) if na and nb else np.zeros((na, nb))
    norm_a = np.linalg.norm(ga.features, axis=1)
    norm_b = np.linalg.norm(gb.features, axis=1)

    first = np.zeros((na + 1, nb + 1))
    first[:na, :nb] = base
    first[:na, nb] = norm_a
    first[na, :nb] = norm_b
    tables = [DistanceTable(1, first)]

    nbrs_a = _neighbor_arrays(ga)
    nbrs_b = _neighbor_arrays(gb)
    for k in range(2, cfg.depth + 1):
        w = cfg.schedule.weight(k - 1)
        prev = tables[-1].dist
        cur = np.zeros((na + 1, nb + 1))
        for u in range(na):
            agg = float(prev[nbrs_a[u], nb].sum())
            if mean and len(nbrs_a[u]):
                agg /= len(nbrs_a[u])
            cur[u, nb] = norm_a[u] + w * agg
        for v in range(nb):
            agg = float(prev[na, nbrs_b[v]].sum())
            if mean and len(nbrs_b[v]):
                agg /= len(nbrs_b[v])
            cur[na, v] = norm_b[v] + w * agg
        for u in range(na):
            au = nbrs_a[u]
            rn = prev[au, nb]
            for v in range(nb):
                bv = nbrs_b[v]
                child_cost = _augmented_cost(
                    prev[np.ix_(au, bv)], rn, prev[na, bv], mean
                )
                cur[u, v] = base[u, v] + w * child_cost
        tables.append(DistanceTable(k, cur))
    return tables


def tree_distance(ga, u, gb, v, depth, cfg):
    """Distance between the depth-`depth` trees rooted at u in ga and v in gb."""
    if not (0 <= u < ga.node_count):
        raise IndexError(f"node {u} out of range for {ga.node_count} nodes")
    if not (0 <= v < gb.node_count):
        raise IndexError(f"node {v} out of range for {gb.node_count} nodes")
    local = TmdConfig(depth, cfg.schedule, cfg.mode)
    tables = build_distance_tables(ga, gb, local)
    return float(tables[-1].dist[u, v])


def tree_norm_levels(g, depth, cfg):
    """Per-node tree norms for every depth 1..depth; list of length `depth`.

    The norm of a tree is its distance to the blank tree: the root feature
    norm plus the weighted (mode-scaled) sum of child tree norms.
    """
    mean = cfg.mode == "mean"
    base = np.linalg.norm(g.features, axis=1)
    levels = [base]
    nbrs = _neighbor_arrays(g)
    for k in range(2, depth + 1):
        w = cfg.schedule.weight(k - 1)
        prev = levels[-1]
        cur = np.empty_like(base)
        for v in range(g.node_count):
            agg = float(prev[nbrs[v]].sum())
            if mean and len(nbrs[v]):
                agg /= len(nbrs[v])
            cur[v] = base[v] + w * agg
        levels.append(cur)
    return levels


def tree_norm(g, v, depth, cfg):
    """Distance between the depth-`depth` tree rooted at v and the blank tree."""
    if not (0 <= v < g.node_count):
        raise IndexError(f"node {v} out of range for {g.node_count} nodes")
    _warn_zero_features(g)
    return float(tree_norm_levels(g, depth, cfg)[-1][v])


def tmd(ga, gb, cfg):
    """Tree mover's distance at cfg.depth between two attributed graphs.

    Arguments are ordered canonically before computing, so the result is
    bitwise symmetric.
    """
    if graph_key(gb) < graph_key(ga):
        ga, gb = gb, ga
    na, nb = ga.node_count, gb.node_count
    if na == 0 and nb == 0:
        return 0.0
    tables = build_distance_tables(ga, gb, cfg)
    last = tables[-1].dist
    return _augmented_cost(
        last[:na, :nb], last[:na, nb], last[na, :nb], cfg.mode == "mean"
    )
