"""Backend benchmark: numba-compiled kernels vs the pure-numpy fallback.

Run as ``python -m qcstretch.benchmark``; times the three hot paths
(map evaluation, weight/B-field assembly, batched Jacobi eigensolve) on
both backends and prints the speedups. The numba warmup (JIT compile) is
excluded from the timings.
"""

import argparse
import time

import numpy as np

from .backend import load_kernels


def _time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run(dim=3, centers=20, samples=20000, repeats=3, seed=0, quiet=False):
    rng = np.random.default_rng(seed)
    cen = rng.uniform(-1.0, 1.0, size=(centers, dim))
    xs = rng.uniform(-2.0, 2.0, size=(samples, dim))
    mats = rng.normal(size=(samples, dim, dim))
    mats = (mats + mats.transpose(0, 2, 1)) / 2.0
    inv_k = 0.5
    alpha = 0.5

    backends = {}
    for name in ("numba", "numpy"):
        try:
            backends[name] = load_kernels(name)
        except ImportError:
            if not quiet:
                print(f"backend {name} unavailable, skipping")

    cases = {
        "eval_map_many": lambda k: k.eval_map_many(cen, inv_k, xs),
        "weight_b_many": lambda k: k.weight_b_many(cen, inv_k, xs),
        "jacobi_eigh_many": lambda k: k.jacobi_eigh_many(mats),
        "jac_sum_many": lambda k: k.jac_sum_many(cen, inv_k, alpha, xs),
    }

    results = {}
    for case, fn in cases.items():
        row = {}
        for name, kern in backends.items():
            fn(kern)  # warmup (JIT compile for numba)
            row[name] = _time(lambda: fn(kern), repeats)
        results[case] = row

    if not quiet:
        print(
            f"dim={dim} centers={centers} samples={samples} repeats={repeats} "
            f"(best-of timings, seconds)"
        )
        header = f"{'kernel':<20}" + "".join(f"{n:>12}" for n in backends)
        if len(backends) == 2:
            header += f"{'speedup':>10}"
        print(header)
        for case, row in results.items():
            line = f"{case:<20}" + "".join(f"{row[n]:>12.6f}" for n in backends)
            if len(backends) == 2:
                line += f"{row['numpy'] / row['numba']:>9.1f}x"
            print(line)
    return results


def main(argv=None):
    parser = argparse.ArgumentParser(description="qcstretch backend benchmark")
    parser.add_argument("--dim", type=int, default=3)
    parser.add_argument("--centers", type=int, default=20)
    parser.add_argument("--samples", type=int, default=20000)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    run(args.dim, args.centers, args.samples, args.repeats, args.seed)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
