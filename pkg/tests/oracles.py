"""Independent oracles shared by unit and acceptance tests.

Everything here is deliberately written against first principles (explicit
loops, breakpoint enumeration, full decompositions) rather than reusing the
library's own code paths.
"""

import numpy as np


def finite_difference_pair_gradient(objective, delta, h=1e-5):
    """Central differences of a scalar objective over unordered-pair bumps.

    Each (i, j) bump moves both mirrored entries together, matching the
    pair-variable convention of the analytic gradients.
    """
    n = delta.shape[0]
    grad = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            dp = delta.copy()
            dp[i, j] += h
            dp[j, i] += h
            dm = delta.copy()
            dm[i, j] -= h
            dm[j, i] -= h
            g = (objective(dp) - objective(dm)) / (2.0 * h)
            grad[i, j] = grad[j, i] = g
    return grad


def assert_gradient_close(analytic, fd, rel_tol=1e-3, abs_floor=1e-8):
    """Per-entry relative comparison with an absolute floor for tiny entries."""
    n = analytic.shape[0]
    worst = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            a, f = analytic[i, j], fd[i, j]
            if abs(f) < abs_floor:
                err = abs(a - f)
                assert err <= abs_floor * 10, f"entry ({i},{j}): {a} vs {f}"
            else:
                err = abs(a - f) / abs(f)
                assert err <= rel_tol, f"entry ({i},{j}): {a} vs {f} rel {err:.2e}"
            worst = max(worst, err)
    return worst


def qp_project_oracle(v, budget):
    """Exact Euclidean projection onto {0 <= x <= 1, sum x <= budget}.

    Active-set enumeration: the solution is clip(v - mu, 0, 1) for the
    smallest mu >= 0 meeting the budget; the clipped sum is piecewise linear
    in mu with breakpoints at v_i and v_i - 1, so scanning segments finds mu
    exactly.
    """
    v = np.asarray(v, dtype=np.float64)
    x0 = np.clip(v, 0.0, 1.0)
    if x0.sum() <= budget + 1e-12:
        return x0
    breaks = np.unique(np.concatenate([v, v - 1.0, [0.0]]))
    breaks = np.sort(breaks[breaks >= 0.0])

    def clipped_sum(mu):
        return np.clip(v - mu, 0.0, 1.0).sum()

    for lo, hi in zip(breaks[:-1], breaks[1:]):
        s_lo, s_hi = clipped_sum(lo), clipped_sum(hi)
        if s_hi <= budget <= s_lo:
            if s_lo == s_hi:
                mu = lo
            else:
                # linear on the segment
                mu = lo + (s_lo - budget) * (hi - lo) / (s_lo - s_hi)
            return np.clip(v - mu, 0.0, 1.0)
    # budget below the sum at the last breakpoint (all entries clipped to 0)
    return np.zeros_like(v)


def laplacian_oracle(adj):
    """Normalized Laplacian by the direct entry formula."""
    n = adj.shape[0]
    deg = adj.sum(axis=1)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = (1.0 if i == j else 0.0) - adj[i, j] / np.sqrt(deg[i] * deg[j])
    return out


def spectral_distance_oracle(adj_a, adj_b):
    """Distance via two independent full decompositions."""
    la = np.linalg.eigvalsh(laplacian_oracle(adj_a))
    lb = np.linalg.eigvalsh(laplacian_oracle(adj_b))
    return float(np.sqrt(((la - lb) ** 2).sum()))


def truncated_binomial_mean(n, p, cap):
    """E[X | X <= cap] for X ~ Binomial(n, p), computed exactly."""
    from math import comb

    probs = np.array([comb(n, k) * p**k * (1 - p) ** (n - k) for k in range(cap + 1)])
    ks = np.arange(cap + 1)
    z = probs.sum()
    mean = (ks * probs).sum() / z
    var = ((ks - mean) ** 2 * probs).sum() / z
    return mean, var, z
