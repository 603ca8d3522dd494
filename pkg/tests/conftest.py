"""Shared fixtures: seeded random graphs with guaranteed positive degrees."""

import numpy as np
import pytest

from spacattack.graph import Graph


def random_adjacency(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Symmetric {0,1} adjacency with zero diagonal and no isolated nodes."""
    for _ in range(200):
        a = (rng.random((n, n)) < p).astype(np.float64)
        a = np.triu(a, 1)
        a = a + a.T
        if a.sum(axis=1).min() >= 1:
            return a
    raise RuntimeError("could not draw a graph without isolated nodes")


def random_graph(n: int, p: float, seed: int = 0, **kwargs) -> Graph:
    rng = np.random.default_rng(seed)
    return Graph(adjacency=random_adjacency(n, p, rng), **kwargs)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def two_cliques(k: int = 4) -> Graph:
    """Two disconnected k-cliques (2k nodes), labeled by clique."""
    n = 2 * k
    a = np.zeros((n, n))
    a[:k, :k] = 1.0
    a[k:, k:] = 1.0
    np.fill_diagonal(a, 0.0)
    labels = np.array([0] * k + [1] * k)
    return Graph(adjacency=a, labels=labels)
