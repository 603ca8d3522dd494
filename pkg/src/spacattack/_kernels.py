"""Hot numeric kernels: numba-jitted loops with pure-numpy fallbacks.

The jitted path is used whenever numba imports cleanly. Set the environment
variable ``SPACATTACK_DISABLE_NUMBA=1`` before import to force the numpy
implementations (useful for debugging and for the kernel benchmark).
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("SPACATTACK_DISABLE_NUMBA", "0") not in ("", "0")

try:
    if _DISABLED:
        raise ImportError("numba disabled by SPACATTACK_DISABLE_NUMBA")
    from numba import njit

    NUMBA_ENABLED = True
except ImportError:
    NUMBA_ENABLED = False


# ---------------------------------------------------------------------------
# numpy reference implementations
# ---------------------------------------------------------------------------

def _laplacian_np(adj: np.ndarray) -> np.ndarray:
    deg = adj.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(deg)
    lap = -(adj * inv_sqrt[:, None]) * inv_sqrt[None, :]
    lap[np.diag_indices_from(lap)] += 1.0
    return lap


def _propagator_np(adj: np.ndarray) -> np.ndarray:
    a_tilde = adj + np.eye(adj.shape[0])
    deg = a_tilde.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(deg)
    return (a_tilde * inv_sqrt[:, None]) * inv_sqrt[None, :]


def _clipped_sum_np(values: np.ndarray, shift: float) -> float:
    return float(np.clip(values - shift, 0.0, 1.0).sum())


def _pair_gradient_np(
    weight: np.ndarray,
    adj: np.ndarray,
    deg: np.ndarray,
    legal: np.ndarray,
    sign: float,
) -> np.ndarray:
    sq = np.sqrt(np.outer(deg, deg))
    m = weight * adj / (2.0 * sq)
    r = m.sum(axis=1) / deg
    grad = 2.0 * sign * legal * (weight / sq - (r[:, None] + r[None, :]))
    np.fill_diagonal(grad, 0.0)
    return grad


# ---------------------------------------------------------------------------
# numba loop implementations (fused, no temporaries)
# ---------------------------------------------------------------------------

if NUMBA_ENABLED:

    @njit(cache=True)
    def _laplacian_nb(adj):  # pragma: no cover - exercised via dispatch
        n = adj.shape[0]
        inv_sqrt = np.empty(n)
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += adj[i, j]
            inv_sqrt[i] = 1.0 / np.sqrt(s)
        lap = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                v = -adj[i, j] * inv_sqrt[i] * inv_sqrt[j]
                if i == j:
                    v += 1.0
                lap[i, j] = v
        return lap

    @njit(cache=True)
    def _propagator_nb(adj):  # pragma: no cover
        n = adj.shape[0]
        inv_sqrt = np.empty(n)
        for i in range(n):
            s = 1.0
            for j in range(n):
                s += adj[i, j]
            inv_sqrt[i] = 1.0 / np.sqrt(s)
        out = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                a = adj[i, j] + (1.0 if i == j else 0.0)
                out[i, j] = a * inv_sqrt[i] * inv_sqrt[j]
        return out

    @njit(cache=True, fastmath=True)  # fastmath lets the reduction vectorize
    def _clipped_sum_nb(values, shift):  # pragma: no cover
        s = 0.0
        for k in range(values.shape[0]):
            v = values[k] - shift
            if v > 1.0:
                v = 1.0
            elif v < 0.0:
                v = 0.0
            s += v
        return s

    @njit(cache=True)
    def _pair_gradient_nb(weight, adj, deg, legal, sign):  # pragma: no cover
        n = adj.shape[0]
        inv_sqrt = np.empty(n)
        for i in range(n):
            inv_sqrt[i] = 1.0 / np.sqrt(deg[i])
        r = np.empty(n)
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += weight[i, j] * adj[i, j] * inv_sqrt[i] * inv_sqrt[j]
            r[i] = 0.5 * s / deg[i]
        grad = np.empty((n, n))
        for i in range(n):
            grad[i, i] = 0.0
            for j in range(i + 1, n):
                g = 2.0 * sign * legal[i, j] * (
                    weight[i, j] * inv_sqrt[i] * inv_sqrt[j] - (r[i] + r[j])
                )
                grad[i, j] = g
                grad[j, i] = g
        return grad

    laplacian_dense = _laplacian_nb
    gcn_propagator_dense = _propagator_nb
    clipped_sum = _clipped_sum_nb
    pair_gradient = _pair_gradient_nb
else:
    laplacian_dense = _laplacian_np
    gcn_propagator_dense = _propagator_np
    clipped_sum = _clipped_sum_np
    pair_gradient = _pair_gradient_np


def bisect_budget_multiplier(values: np.ndarray, budget: float, iters: int = 60) -> float:
    """Find mu >= 0 so that sum(clip(values - mu, 0, 1)) == budget by bisection.

    Assumes the clipped sum at mu=0 exceeds the budget. Returns the upper end
    of the final bracket, so the induced point never overshoots the budget.
    """
    lo = 0.0
    hi = float(values.max(initial=0.0))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if clipped_sum(values, mid) > budget:
            lo = mid
        else:
            hi = mid
    return hi


def warmup() -> None:
    """Trigger jit compilation on tiny inputs so timings exclude compile cost."""
    a = np.array([[0.0, 1.0], [1.0, 0.0]])
    laplacian_dense(a)
    gcn_propagator_dense(a)
    clipped_sum(np.array([0.5, 0.6]), 0.1)
    pair_gradient(a, a + 0.5, np.array([1.0, 1.0]), a, -1.0)
