"""Benchmark the jitted kernels against the pure-numpy implementations.

Runs each hot kernel on graph sizes typical for the attack loop and prints
the per-call time for both backends plus the speedup. The jitted path is
what the package uses by default; SPACATTACK_DISABLE_NUMBA=1 switches the
whole package to the numpy path, and this script shows what that costs.

Usage: python benchmarks/bench_kernels.py [--sizes 500,1000,2000] [--repeats 5]
"""

import argparse
import time

import numpy as np

from spacattack import _kernels as K


def bench(fn, *args, repeats=5):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def random_adjacency(n, p, rng):
    a = (rng.random((n, n)) < p).astype(np.float64)
    a = np.triu(a, 1)
    return a + a.T


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="500,1000,2000")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if not K.NUMBA_ENABLED:
        print("numba is disabled (SPACATTACK_DISABLE_NUMBA set or import failed);")
        print("only the numpy path is available, nothing to compare.")
        return

    K.warmup()
    rng = np.random.default_rng(0)
    header = f"{'kernel':<22}{'n':>6}{'numba':>12}{'numpy':>12}{'speedup':>9}"
    print(header)
    print("-" * len(header))

    for n in sizes:
        adj = random_adjacency(n, 10.0 / n, rng) + 1e-3  # continuous-ish entries
        deg = adj.sum(axis=1)
        w = rng.normal(size=(n, n))
        w = 0.5 * (w + w.T)
        legal = np.sign(rng.normal(size=(n, n)))
        legal = np.triu(legal, 1) + np.triu(legal, 1).T
        v = rng.uniform(0.0, 1.0, n * (n - 1) // 2)

        pairs = [
            ("laplacian", K._laplacian_nb, K._laplacian_np, (adj,)),
            ("gcn_propagator", K._propagator_nb, K._propagator_np, (adj,)),
            ("pair_gradient", K._pair_gradient_nb, K._pair_gradient_np,
             (w, adj, deg, legal, -1.0)),
            ("clipped_sum x60", None, None, None),  # handled below
        ]
        for name, nb_fn, np_fn, fn_args in pairs:
            if name == "clipped_sum x60":
                budget = 0.05 * v.sum()
                t_nb, _ = bench(
                    lambda: [K._clipped_sum_nb(v, mu) for mu in np.linspace(0, 1, 60)],
                    repeats=args.repeats,
                )
                t_np, _ = bench(
                    lambda: [K._clipped_sum_np(v, mu) for mu in np.linspace(0, 1, 60)],
                    repeats=args.repeats,
                )
            else:
                t_nb, out_nb = bench(nb_fn, *fn_args, repeats=args.repeats)
                t_np, out_np = bench(np_fn, *fn_args, repeats=args.repeats)
                err = np.abs(np.asarray(out_nb) - np.asarray(out_np)).max()
                assert err < 1e-10, f"{name} mismatch: {err}"
            print(f"{name:<22}{n:>6}{t_nb * 1e3:>10.2f}ms{t_np * 1e3:>10.2f}ms"
                  f"{t_np / t_nb:>8.1f}x")
        print()


if __name__ == "__main__":
    main()
