"""Attributed graphs and the edit operations used throughout the package.

A graph is a set of nodes 0..n-1, each carrying a real feature vector of a
shared dimension p >= 1, plus a set of undirected edges without self loops.
Graphs are immutable; every edit returns a new graph.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


class DatasetFormatError(ValueError):
    """Raised when an on-disk graph or dataset file is malformed."""


def _normalize_edges(edges, n):
    out = set()
    for e in edges:
        u, v = int(e[0]), int(e[1])
        if u == v:
            raise ValueError(f"self loop at node {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u}, {v}) out of range for {n} nodes")
        out.add((u, v) if u < v else (v, u))
    return tuple(sorted(out))


@dataclass(frozen=True, eq=False)
class AttributedGraph:
    """Immutable node-attributed undirected graph.

    Parameters
    ----------
    features : array-like, shape (n, p)
        One real feature vector per node. p >= 1 even when n == 0.
    edges : iterable of (u, v)
        Undirected edges. Pairs are normalised to u < v and de-duplicated;
        self loops are rejected.
    """

    features: np.ndarray
    edges: tuple = ()
    neighbors: tuple = field(init=False, repr=False)

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim == 1:
            # column of scalars
            feats = feats.reshape(-1, 1)
        if feats.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {feats.shape}")
        if feats.shape[1] < 1:
            raise ValueError("feature dimension must be >= 1")
        if not np.all(np.isfinite(feats)):
            raise ValueError("features must be finite")
        n = feats.shape[0]
        edges = _normalize_edges(self.edges, n)
        nbrs = [[] for _ in range(n)]
        for u, v in edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        feats.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "neighbors", tuple(tuple(sorted(a)) for a in nbrs))

    @property
    def node_count(self):
        return self.features.shape[0]

    @property
    def feature_dim(self):
        return self.features.shape[1]

    def degree(self, v):
        return len(self.neighbors[v])

    def __eq__(self, other):
        if not isinstance(other, AttributedGraph):
            return NotImplemented
        return (
            self.features.shape == other.features.shape
            and np.array_equal(self.features, other.features)
            and self.edges == other.edges
        )

    def __hash__(self):
        return hash((self.features.tobytes(), self.features.shape, self.edges))


def graph_key(g):
    """Canonical byte key; used to order arguments of symmetric operations."""
    return (g.features.shape, g.features.tobytes(), g.edges)


def drop_node(g, v):
    """Remove node v and its incident edges; higher indices shift down by one."""
    n = g.node_count
    if not (0 <= v < n):
        raise IndexError(f"node {v} out of range for {n} nodes")
    keep = [i for i in range(n) if i != v]
    feats = g.features[keep]
    remap = {old: new for new, old in enumerate(keep)}
    edges = [(remap[a], remap[b]) for a, b in g.edges if a != v and b != v]
    return AttributedGraph(feats, edges)


def drop_edge(g, u, v):
    """Remove the undirected edge {u, v}; errors if it is absent."""
    key = (u, v) if u < v else (v, u)
    if key not in g.edges:
        raise ValueError(f"edge ({u}, {v}) not present")
    return AttributedGraph(g.features, tuple(e for e in g.edges if e != key))


def perturb_feature(g, v, x):
    """Replace node v's feature vector with x."""
    if not (0 <= v < g.node_count):
        raise IndexError(f"node {v} out of range for {g.node_count} nodes")
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != g.feature_dim:
        raise ValueError(
            f"feature has dimension {x.shape[0]}, graph has {g.feature_dim}"
        )
    feats = g.features.copy()
    feats[v] = x
    return AttributedGraph(feats, g.edges)


def permute_nodes(g, perm):
    """Relabel nodes so that old index i becomes perm[i]."""
    n = g.node_count
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(n)):
        raise ValueError("perm is not a permutation of 0..n-1")
    feats = np.empty_like(g.features)
    for old, new in enumerate(perm):
        feats[new] = g.features[old]
    edges = [(perm[a], perm[b]) for a, b in g.edges]
    return AttributedGraph(feats, edges)


def random_graph(n, edge_prob, feature_dim, seed):
    """Erdos-Renyi graph with uniform [-1, 1] features, reproducible per seed."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if not (0.0 <= edge_prob <= 1.0):
        raise ValueError("edge_prob must lie in [0, 1]")
    if feature_dim < 1:
        raise ValueError("feature_dim must be >= 1")
    rng = np.random.default_rng(seed)
    feats = rng.uniform(-1.0, 1.0, size=(n, feature_dim))
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < edge_prob:
                edges.append((u, v))
    return AttributedGraph(feats, edges)


@dataclass(frozen=True)
class GraphDataset:
    """A sequence of graphs with a shared feature dimension, optional labels."""

    graphs: tuple
    labels: tuple = None
    name: str = ""

    def __post_init__(self):
        graphs = tuple(self.graphs)
        if graphs:
            p = graphs[0].feature_dim
            for i, g in enumerate(graphs):
                if g.feature_dim != p:
                    raise ValueError(
                        f"graph {i} has feature dimension {g.feature_dim}, expected {p}"
                    )
        labels = self.labels
        if labels is not None:
            labels = tuple(int(y) for y in labels)
            if len(labels) != len(graphs):
                raise ValueError(
                    f"{len(labels)} labels for {len(graphs)} graphs"
                )
        object.__setattr__(self, "graphs", graphs)
        object.__setattr__(self, "labels", labels)

    @property
    def feature_dim(self):
        return self.graphs[0].feature_dim if self.graphs else 1

    def __len__(self):
        return len(self.graphs)

    def __getitem__(self, i):
        return self.graphs[i]

    def __eq__(self, other):
        if not isinstance(other, GraphDataset):
            return NotImplemented
        return (
            self.graphs == other.graphs
            and self.labels == other.labels
            and self.name == other.name
        )


def graph_to_json(g):
    return {
        "features": [[float(x) for x in row] for row in g.features],
        "edges": [[int(u), int(v)] for u, v in g.edges],
    }


def graph_from_json(obj, feature_dim=1):
    """Build a graph from the JSON object form; feature_dim applies when empty."""
    if not isinstance(obj, dict) or "features" not in obj or "edges" not in obj:
        raise DatasetFormatError("graph JSON must have 'features' and 'edges' keys")
    feats = obj["features"]
    try:
        if len(feats) == 0:
            arr = np.zeros((0, feature_dim))
        else:
            arr = np.asarray(feats, dtype=np.float64)
        return AttributedGraph(arr, [tuple(e) for e in obj["edges"]])
    except (TypeError, ValueError) as exc:
        raise DatasetFormatError(f"bad graph JSON: {exc}") from exc


def save_graph_json(path, g):
    with open(path, "w") as fh:
        json.dump(graph_to_json(g), fh, indent=2)
        fh.write("\n")


def load_graph_json(path):
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DatasetFormatError(f"{path}: invalid JSON: {exc}") from exc
    return graph_from_json(obj)


def dataset_to_json(ds):
    return {
        "name": ds.name,
        "labels": list(ds.labels) if ds.labels is not None else None,
        "graphs": [graph_to_json(g) for g in ds.graphs],
    }


def dataset_from_json(obj):
    if not isinstance(obj, dict) or "graphs" not in obj:
        raise DatasetFormatError("dataset JSON must have a 'graphs' key")
    graphs = [graph_from_json(go) for go in obj["graphs"]]
    return GraphDataset(tuple(graphs), obj.get("labels"), obj.get("name", ""))


def save_dataset_json(path, ds):
    with open(path, "w") as fh:
        json.dump(dataset_to_json(ds), fh, indent=2)
        fh.write("\n")


def load_dataset_json(path):
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DatasetFormatError(f"{path}: invalid JSON: {exc}") from exc
    return dataset_from_json(obj)


def standardize_datasets(datasets):
    """Z-score features per dimension using joint statistics over all datasets.

    Dimensions with zero variance are left untouched. Returns new datasets in
    the input order.
    """
    all_rows = [g.features for ds in datasets for g in ds.graphs if g.node_count]
    if not all_rows:
        return list(datasets)
    stacked = np.vstack(all_rows)
    std = stacked.std(axis=0)
    active = std > 0
    mean = np.where(active, stacked.mean(axis=0), 0.0)
    scale = np.where(active, std, 1.0)
    out = []
    for ds in datasets:
        graphs = tuple(
            AttributedGraph((g.features - mean) / scale, g.edges) for g in ds.graphs
        )
        out.append(GraphDataset(graphs, ds.labels, ds.name))
    return out
