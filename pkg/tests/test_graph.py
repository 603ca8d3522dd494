"""Graph construction, Laplacians, perturbation algebra, and noise injection."""

import numpy as np
import pytest

from spacattack.errors import (
    DomainError,
    IsolatedNodeError,
    ShapeMismatchError,
)
from spacattack.graph import (
    Graph,
    LegalOpsMatrix,
    PerturbationState,
    add_symmetry_noise,
    apply_perturbation,
    normalized_laplacian,
    self_loop_propagator,
)

from conftest import random_adjacency, random_graph


def complete_graph(n):
    return Graph(adjacency=np.ones((n, n)) - np.eye(n))


def single_edge_graph():
    return Graph(adjacency=np.array([[0.0, 1.0], [1.0, 0.0]]))


def dense_laplacian_oracle(adj):
    """Entry-by-entry normalized Laplacian, written independently."""
    n = adj.shape[0]
    deg = [sum(adj[i][j] for j in range(n)) for i in range(n)]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = (1.0 if i == j else 0.0) - adj[i, j] / np.sqrt(deg[i] * deg[j])
    return out


class TestGraphValidation:
    def test_rejects_asymmetric(self):
        a = np.zeros((3, 3))
        a[0, 1] = 1.0
        with pytest.raises(DomainError):
            Graph(adjacency=a)

    def test_rejects_nonzero_diagonal(self):
        a = np.eye(3)
        with pytest.raises(DomainError):
            Graph(adjacency=a)

    def test_rejects_non_binary(self):
        a = np.array([[0.0, 0.5], [0.5, 0.0]])
        with pytest.raises(DomainError):
            Graph(adjacency=a)

    def test_rejects_overlapping_split(self):
        g = random_adjacency(6, 0.6, np.random.default_rng(0))
        with pytest.raises(DomainError):
            Graph(adjacency=g, labels=np.zeros(6, dtype=int),
                  train_idx=[0, 1], test_idx=[1, 2])

    def test_edge_count(self):
        assert single_edge_graph().num_edges == 1
        assert complete_graph(4).num_edges == 6


class TestNormalizedLaplacian:
    def test_k4(self):
        lap = normalized_laplacian(complete_graph(4))
        expected = np.full((4, 4), -1.0 / 3.0)
        np.fill_diagonal(expected, 1.0)
        np.testing.assert_allclose(lap, expected, atol=1e-15)

    def test_single_edge(self):
        lap = normalized_laplacian(single_edge_graph())
        np.testing.assert_allclose(lap, [[1.0, -1.0], [-1.0, 1.0]], atol=1e-15)

    def test_matches_dense_oracle(self):
        g = random_graph(10, 0.4, seed=42)
        np.testing.assert_allclose(
            normalized_laplacian(g), dense_laplacian_oracle(g.adjacency), atol=1e-12
        )

    def test_isolated_node_raises(self):
        a = np.zeros((3, 3))
        a[0, 1] = a[1, 0] = 1.0
        with pytest.raises(IsolatedNodeError) as err:
            normalized_laplacian(Graph(adjacency=a))
        assert err.value.node == 2

    def test_trace_equals_n(self):
        for seed in range(5):
            g = random_graph(20, 0.3, seed=seed)
            assert np.trace(normalized_laplacian(g)) == pytest.approx(20.0, abs=1e-9)


class TestSelfLoopPropagator:
    def test_one_node(self):
        g = Graph(adjacency=np.zeros((1, 1)))
        np.testing.assert_allclose(self_loop_propagator(g), [[1.0]])

    def test_single_edge(self):
        np.testing.assert_allclose(
            self_loop_propagator(single_edge_graph()), np.full((2, 2), 0.5), atol=1e-15
        )

    def test_matches_dense_oracle(self):
        g = random_graph(30, 0.2, seed=7)
        a_tilde = g.adjacency + np.eye(30)
        deg = a_tilde.sum(axis=1)
        expected = np.array(
            [[a_tilde[i, j] / np.sqrt(deg[i] * deg[j]) for j in range(30)] for i in range(30)]
        )
        got = self_loop_propagator(g)
        np.testing.assert_allclose(got, expected, atol=1e-12)
        np.testing.assert_allclose(got, got.T, atol=1e-15)


class TestApplyPerturbation:
    def test_zero_perturbation_is_identity(self):
        g = random_graph(8, 0.4, seed=1)
        np.testing.assert_array_equal(apply_perturbation(g, np.zeros((8, 8))), g.adjacency)

    def test_flip_removes_single_edge(self):
        g = single_edge_graph()
        p = np.array([[0.0, 1.0], [1.0, 0.0]])
        np.testing.assert_array_equal(apply_perturbation(g, p), np.zeros((2, 2)))

    def test_matches_xor_oracle(self):
        g = random_graph(15, 0.3, seed=3)
        rng = np.random.default_rng(99)
        iu = np.triu_indices(15, 1)
        flips = rng.choice(iu[0].size, size=5, replace=False)
        p = np.zeros((15, 15))
        p[iu[0][flips], iu[1][flips]] = 1.0
        p = p + p.T
        expected = g.adjacency.copy()
        for k in flips:
            u, v = iu[0][k], iu[1][k]
            expected[u, v] = expected[v, u] = 1.0 - expected[u, v]
        np.testing.assert_array_equal(apply_perturbation(g, p), expected)

    def test_shape_mismatch(self):
        g = random_graph(6, 0.5, seed=0)
        with pytest.raises(ShapeMismatchError):
            apply_perturbation(g, np.zeros((5, 5)))

    def test_domain_error(self):
        g = random_graph(6, 0.5, seed=0)
        with pytest.raises(DomainError):
            apply_perturbation(g, np.full((6, 6), 1.5))

    def test_binary_output_valid_and_involutive(self):
        for seed in range(5):
            g = random_graph(12, 0.35, seed=seed)
            rng = np.random.default_rng(seed + 100)
            iu = np.triu_indices(12, 1)
            mask = rng.random(iu[0].size) < 0.2
            b = np.zeros((12, 12))
            b[iu[0][mask], iu[1][mask]] = 1.0
            b = b + b.T
            a1 = apply_perturbation(g, b)
            assert set(np.unique(a1)) <= {0.0, 1.0}
            np.testing.assert_array_equal(a1, a1.T)
            assert np.all(np.diag(a1) == 0)
            # applying the same flips to the perturbed graph restores the original
            g1 = Graph(adjacency=a1)
            np.testing.assert_array_equal(apply_perturbation(g1, b), g.adjacency)


class TestLegalOps:
    def test_entries(self):
        g = random_graph(9, 0.4, seed=5)
        c = LegalOpsMatrix.from_graph(g).c
        assert np.all(np.diag(c) == 0)
        off = ~np.eye(9, dtype=bool)
        assert np.all(c[off & (g.adjacency > 0)] == -1)
        assert np.all(c[off & (g.adjacency == 0)] == 1)


class TestPerturbationState:
    def test_valid(self):
        d = np.zeros((4, 4))
        d[0, 1] = d[1, 0] = 0.5
        state = PerturbationState(delta=d, budget=2.0)
        assert state.pair_l1() == pytest.approx(0.5)

    def test_rejects_out_of_range(self):
        d = np.zeros((3, 3))
        d[0, 1] = d[1, 0] = 1.5
        with pytest.raises(DomainError):
            PerturbationState(delta=d, budget=1.0)


class TestSymmetryNoise:
    def test_additive_bound(self, rng):
        a = random_adjacency(10, 0.4, rng)
        out = add_symmetry_noise(a, noise_scale=1e-7, rng=0)
        assert np.abs(out - a).max() <= 1e-7

    def test_output_symmetric(self, rng):
        a = random_adjacency(10, 0.4, rng)
        for seed in range(3):
            out = add_symmetry_noise(a, noise_scale=1e-3, rng=seed)
            np.testing.assert_allclose(out, out.T, atol=1e-16)

    def test_breaks_triangle_multiplicity(self):
        a = np.ones((3, 3)) - np.eye(3)
        lam_clean = np.linalg.eigvalsh(normalized_laplacian(Graph(adjacency=a)))
        assert abs(lam_clean[1] - lam_clean[2]) < 1e-12  # K3 has a repeated eigenvalue
        noisy = add_symmetry_noise(a, noise_scale=1e-5, rng=0)
        lam = np.linalg.eigvalsh(normalized_laplacian(noisy))
        assert np.diff(lam).min() > 1e-6  # separated at noise_scale / 10
