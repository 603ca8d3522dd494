"""Graph representation, normalized Laplacians, and edge-perturbation algebra.

A graph is held as a dense symmetric binary adjacency matrix. Edge edits are
expressed through a legal-operations matrix ``C`` whose entries mark which
pairs may gain (+1) or lose (-1) an edge, so that ``A + C * P`` applies a
perturbation ``P`` (binary or relaxed to [0, 1]) in one algebraic step.
Budgets and flip counts always count each unordered pair once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import gcn_propagator_dense, laplacian_dense
from .errors import (
    DomainError,
    IsolatedNodeError,
    ShapeMismatchError,
)

DEFAULT_NOISE_SCALE = 1e-5


def _check_square_symmetric(a: np.ndarray, name: str, tol: float = 0.0) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeMismatchError(f"{name} must be square, got shape {a.shape}")
    if tol == 0.0:
        ok = np.array_equal(a, a.T)
    else:
        ok = np.abs(a - a.T).max() <= tol
    if not ok:
        raise DomainError(f"{name} must be symmetric")


@dataclass
class Graph:
    """Undirected graph with optional node features, labels, and split.

    adjacency: n x n symmetric {0,1} matrix with zero diagonal.
    features: optional n x d real matrix.
    labels: optional per-node integer class ids.
    train_idx / test_idx: optional disjoint node-id arrays.
    """

    adjacency: np.ndarray
    features: np.ndarray | None = None
    labels: np.ndarray | None = None
    train_idx: np.ndarray | None = None
    test_idx: np.ndarray | None = None

    def __post_init__(self):
        self.adjacency = np.asarray(self.adjacency, dtype=np.float64)
        _check_square_symmetric(self.adjacency, "adjacency")
        if not np.all(np.isin(self.adjacency, (0.0, 1.0))):
            raise DomainError("adjacency entries must be 0 or 1")
        if np.any(np.diag(self.adjacency) != 0.0):
            raise DomainError("adjacency diagonal must be zero")
        if self.features is not None:
            self.features = np.asarray(self.features, dtype=np.float64)
            if self.features.shape[0] != self.n:
                raise ShapeMismatchError(
                    f"features have {self.features.shape[0]} rows for {self.n} nodes"
                )
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (self.n,):
                raise ShapeMismatchError("labels must have one entry per node")
            if self.labels.min() < 0:
                raise DomainError("labels must be nonnegative class ids")
        for name in ("train_idx", "test_idx"):
            idx = getattr(self, name)
            if idx is not None:
                idx = np.asarray(idx, dtype=np.int64)
                if idx.size and (idx.min() < 0 or idx.max() >= self.n):
                    raise DomainError(f"{name} contains out-of-range node ids")
                setattr(self, name, idx)
        if self.train_idx is not None and self.test_idx is not None:
            if np.intersect1d(self.train_idx, self.test_idx).size:
                raise DomainError("train and test splits must be disjoint")

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def num_edges(self) -> int:
        """Number of undirected edges."""
        return int(round(self.adjacency.sum())) // 2

    @property
    def num_classes(self) -> int:
        if self.labels is None:
            return 0
        return int(self.labels.max()) + 1

    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    def edge_list(self) -> np.ndarray:
        """Undirected edges as an (m, 2) array with u < v."""
        iu, ju = np.where(np.triu(self.adjacency, 1) > 0)
        return np.column_stack([iu, ju])


@dataclass
class LegalOpsMatrix:
    """Matrix C = complement(A) - A: +1 marks addable pairs, -1 removable edges."""

    c: np.ndarray

    @classmethod
    def from_graph(cls, g: Graph) -> "LegalOpsMatrix":
        n = g.n
        comp = np.ones((n, n)) - np.eye(n) - g.adjacency
        return cls(c=comp - g.adjacency)


@dataclass
class PerturbationState:
    """Relaxed perturbation matrix and the L1 budget it must respect."""

    delta: np.ndarray
    budget: float

    def __post_init__(self):
        self.delta = np.asarray(self.delta, dtype=np.float64)
        _check_square_symmetric(self.delta, "delta", tol=1e-12)
        if self.delta.min() < -1e-12 or self.delta.max() > 1.0 + 1e-12:
            raise DomainError("delta entries must lie in [0, 1]")
        if np.any(np.diag(self.delta) != 0.0):
            raise DomainError("delta diagonal must be zero")

    def pair_l1(self) -> float:
        """L1 mass counting each unordered pair once."""
        return float(np.triu(self.delta, 1).sum())


def normalized_laplacian(g: Graph | np.ndarray) -> np.ndarray:
    """L = I - D^{-1/2} A D^{-1/2} for a graph or a raw adjacency matrix.

    Raises IsolatedNodeError if any degree is zero.
    """
    adj = g.adjacency if isinstance(g, Graph) else np.asarray(g, dtype=np.float64)
    deg = adj.sum(axis=1)
    zero = np.where(deg <= 0.0)[0]
    if zero.size:
        raise IsolatedNodeError(int(zero[0]))
    return laplacian_dense(adj)


def self_loop_propagator(g: Graph | np.ndarray) -> np.ndarray:
    """Self-loop enhanced operator D~^{-1/2} (A + I) D~^{-1/2}."""
    adj = g.adjacency if isinstance(g, Graph) else np.asarray(g, dtype=np.float64)
    return gcn_propagator_dense(adj)


def apply_perturbation(g: Graph, p: np.ndarray) -> np.ndarray:
    """A' = A + C * p for a symmetric perturbation p with entries in [0, 1]."""
    p = np.asarray(p, dtype=np.float64)
    if p.shape != g.adjacency.shape:
        raise ShapeMismatchError(
            f"perturbation shape {p.shape} does not match graph ({g.n}, {g.n})"
        )
    if p.min() < 0.0 or p.max() > 1.0:
        raise DomainError("perturbation entries must lie in [0, 1]")
    c = LegalOpsMatrix.from_graph(g).c
    return g.adjacency + c * p


def add_symmetry_noise(
    a_prime: np.ndarray,
    noise_scale: float = DEFAULT_NOISE_SCALE,
    rng: np.random.Generator | int | None = 0,
) -> np.ndarray:
    """Add a tiny symmetric uniform-noise term to separate tied eigenvalues.

    Used only inside gradient evaluation; the noise magnitude is bounded by
    ``noise_scale`` per entry.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    n = a_prime.shape[0]
    noise = rng.uniform(0.0, 1.0, size=(n, n))
    return a_prime + noise_scale * 0.5 * (noise + noise.T)
