"""Dataset ingestion and synthetic graph generators.

File formats: edge list as "u<TAB>v" per line (0-indexed, each undirected
pair once), features as CSV rows per node, labels as "node_id,label" CSV,
split as JSON {"train": [...], "test": [...]}.
"""

from __future__ import annotations

import json
import warnings
from pathlib import Path

import numpy as np

from .errors import (
    DisconnectedOutputWarning,
    DuplicateEdgeWarning,
    InconsistentDimsError,
    ParseError,
)
from .graph import Graph

# Zachary's karate club: 34 nodes, 78 edges, with the two-faction membership.
KARATE_EDGES = [
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8), (0, 10),
    (0, 11), (0, 12), (0, 13), (0, 17), (0, 19), (0, 21), (0, 31),
    (1, 2), (1, 3), (1, 7), (1, 13), (1, 17), (1, 19), (1, 21), (1, 30),
    (2, 3), (2, 7), (2, 8), (2, 9), (2, 13), (2, 27), (2, 28), (2, 32),
    (3, 7), (3, 12), (3, 13),
    (4, 6), (4, 10),
    (5, 6), (5, 10), (5, 16),
    (6, 16),
    (8, 30), (8, 32), (8, 33),
    (9, 33),
    (13, 33),
    (14, 32), (14, 33),
    (15, 32), (15, 33),
    (18, 32), (18, 33),
    (19, 33),
    (20, 32), (20, 33),
    (22, 32), (22, 33),
    (23, 25), (23, 27), (23, 29), (23, 32), (23, 33),
    (24, 25), (24, 27), (24, 31),
    (25, 31),
    (26, 29), (26, 33),
    (27, 33),
    (28, 31), (28, 33),
    (29, 32), (29, 33),
    (30, 32), (30, 33),
    (31, 32), (31, 33),
    (32, 33),
]

_KARATE_FACTION_ONE = {0, 1, 2, 3, 4, 5, 6, 7, 8, 10, 11, 12, 13, 16, 17, 19, 21}


def karate_club() -> Graph:
    """The canonical 34-node karate-club graph with faction labels."""
    n = 34
    adj = np.zeros((n, n))
    for u, v in KARATE_EDGES:
        adj[u, v] = adj[v, u] = 1.0
    labels = np.array([0 if i in _KARATE_FACTION_ONE else 1 for i in range(n)])
    return Graph(adjacency=adj, labels=labels)


def _patch_isolated(adj: np.ndarray, neighbor_of: callable) -> np.ndarray:
    isolated = np.where(adj.sum(axis=1) == 0)[0]
    if isolated.size:
        warnings.warn(
            f"{isolated.size} isolated node(s) connected deterministically",
            DisconnectedOutputWarning,
            stacklevel=3,
        )
        for i in isolated:
            j = neighbor_of(int(i))
            adj[i, j] = adj[j, i] = 1.0
    return adj


def sbm(
    sizes: list[int],
    p_in: float,
    p_out: float,
    seed: int = 0,
    feature_signal: float = 1.0,
    feature_noise: float = 1.0,
) -> Graph:
    """Stochastic block model with block-id labels and noisy block features."""
    n = int(sum(sizes))
    labels = np.repeat(np.arange(len(sizes)), sizes)
    rng = np.random.default_rng(seed)
    prob = np.where(labels[:, None] == labels[None, :], p_in, p_out)
    draw = rng.random((n, n))
    adj = np.triu(draw < prob, 1).astype(np.float64)
    adj = adj + adj.T

    def same_block_neighbor(i: int) -> int:
        block = np.where((labels == labels[i]) & (np.arange(n) != i))[0]
        return int(block[0]) if block.size else (i + 1) % n

    adj = _patch_isolated(adj, same_block_neighbor)

    k = len(sizes)
    features = feature_noise * rng.standard_normal((n, k))
    features[np.arange(n), labels] += feature_signal
    return Graph(adjacency=adj, features=features, labels=labels)


def random_geometric(
    n: int,
    radius: float,
    seed: int = 0,
    clusters: int = 2,
) -> Graph:
    """Random geometric graph on the unit square; labels by spatial k-means."""
    rng = np.random.default_rng(seed)
    points = rng.random((n, 2))
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    adj = np.triu(dist <= radius, 1).astype(np.float64)
    adj = adj + adj.T

    np.fill_diagonal(dist, np.inf)
    adj = _patch_isolated(adj, lambda i: int(dist[i].argmin()))

    from scipy.cluster.vq import kmeans2

    _, labels = kmeans2(points, clusters, seed=rng, minit="++")
    return Graph(adjacency=adj, features=points.copy(), labels=labels.astype(np.int64))


def make_split(
    g: Graph,
    train_per_class: int,
    test_count: int,
    seed: int = 0,
) -> Graph:
    """Attach a train split of ``train_per_class`` nodes per class and a
    disjoint random test set; returns a new Graph sharing the arrays."""
    rng = np.random.default_rng(seed)
    train = []
    for c in range(g.num_classes):
        members = np.where(g.labels == c)[0]
        take = min(train_per_class, members.size)
        train.extend(rng.choice(members, size=take, replace=False))
    train = np.sort(np.asarray(train, dtype=np.int64))
    rest = np.setdiff1d(np.arange(g.n), train)
    test = np.sort(rng.choice(rest, size=min(test_count, rest.size), replace=False))
    return Graph(
        adjacency=g.adjacency,
        features=g.features,
        labels=g.labels,
        train_idx=train,
        test_idx=test,
    )


def _parse_edges(path: Path) -> list[tuple[int, int]]:
    edges = []
    seen = set()
    duplicates = 0
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            s = line.strip()
            if not s:
                continue
            parts = s.split()
            if len(parts) != 2:
                raise ParseError(path, line_no, f"expected 'u\\tv', got {s!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(path, line_no, f"non-integer node id in {s!r}") from None
            if u == v:
                raise ParseError(path, line_no, f"self-loop {u} not allowed")
            if u < 0 or v < 0:
                raise ParseError(path, line_no, "negative node id")
            key = (min(u, v), max(u, v))
            if key in seen:
                duplicates += 1
                continue
            seen.add(key)
            edges.append(key)
    if duplicates:
        warnings.warn(
            f"{duplicates} duplicate edge line(s) in {path} deduplicated",
            DuplicateEdgeWarning,
            stacklevel=3,
        )
    return edges


def _parse_csv_matrix(path: Path) -> np.ndarray:
    rows = []
    width = None
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            s = line.strip()
            if not s:
                continue
            try:
                row = [float(tok) for tok in s.split(",")]
            except ValueError:
                raise ParseError(path, line_no, "non-numeric feature value") from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ParseError(path, line_no, f"expected {width} columns, got {len(row)}")
            rows.append(row)
    return np.asarray(rows, dtype=np.float64)


def _parse_labels(path: Path, n: int) -> np.ndarray:
    labels = np.full(n, -1, dtype=np.int64)
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            s = line.strip()
            if not s:
                continue
            parts = s.split(",")
            if len(parts) != 2:
                raise ParseError(path, line_no, f"expected 'node_id,label', got {s!r}")
            try:
                node, lab = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(path, line_no, "non-integer id or label") from None
            if not 0 <= node < n:
                raise InconsistentDimsError(f"{path}:{line_no}: node id {node} out of range")
            labels[node] = lab
    if (labels < 0).any():
        raise InconsistentDimsError(f"{path} does not label every node")
    return labels


def load_dataset(
    edge_path: str | Path,
    feature_path: str | Path | None = None,
    label_path: str | Path | None = None,
    split_path: str | Path | None = None,
) -> Graph:
    """Assemble a validated Graph from the on-disk formats."""
    edges = _parse_edges(Path(edge_path))
    max_id = max((max(e) for e in edges), default=-1)

    features = None
    if feature_path is not None:
        features = _parse_csv_matrix(Path(feature_path))
        n = features.shape[0]
        if max_id >= n:
            raise InconsistentDimsError(
                f"edge list references node {max_id} but features have {n} rows"
            )
    else:
        n = max_id + 1

    adj = np.zeros((n, n))
    for u, v in edges:
        adj[u, v] = adj[v, u] = 1.0

    labels = _parse_labels(Path(label_path), n) if label_path is not None else None

    train_idx = test_idx = None
    if split_path is not None:
        with open(split_path, encoding="utf-8") as fh:
            try:
                split = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(split_path, exc.lineno, exc.msg) from None
        train_idx = np.asarray(split["train"], dtype=np.int64)
        test_idx = np.asarray(split["test"], dtype=np.int64)

    return Graph(
        adjacency=adj,
        features=features,
        labels=labels,
        train_idx=train_idx,
        test_idx=test_idx,
    )
