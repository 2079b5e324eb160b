"""Time the oracle kernels: numba-compiled loops against the vectorised numpy path.

    python3 benchmarks/bench_oracle.py --sizes 100 1000 10000 --repeat 3
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from braess import _kernels


def make_batch(n: int, seed: int):
    rng = np.random.default_rng(seed)
    alpha = rng.uniform(0, 50, (n, 5))
    beta = np.exp(rng.uniform(np.log(0.1), np.log(30), (n, 5)))
    q = rng.uniform(0.01, 20, n)
    return alpha, beta, q


def best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[100, 1000, 10000])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--skip-grid", action="store_true", help="only time the active-set kernel")
    args = parser.parse_args()

    if not _kernels.NUMBA_AVAILABLE:
        raise SystemExit("numba is not installed; nothing to compare")

    # compile outside the timed region
    warm = make_batch(4, args.seed)
    _kernels.active_set(*warm, 3, use_numba=True)
    _kernels.golden(*warm, 3, use_numba=True)

    print(f"{'kernel':<11}{'n':>8}{'numba s':>12}{'numpy s':>12}{'speedup':>10}{'max |diff|':>13}")
    for n in args.sizes:
        alpha, beta, q = make_batch(n, args.seed)
        kernels = [("active_set", _kernels.active_set)]
        if not args.skip_grid:
            kernels.append(("golden", _kernels.golden))
        for name, kern in kernels:
            out_j = kern(alpha, beta, q, 3, use_numba=True)
            out_n = kern(alpha, beta, q, 3, use_numba=False)
            diff = max(float(np.max(np.abs(a - b))) for a, b in zip(out_j, out_n))
            t_j = best_of(lambda: kern(alpha, beta, q, 3, use_numba=True), args.repeat)
            t_n = best_of(lambda: kern(alpha, beta, q, 3, use_numba=False), args.repeat)
            print(f"{name:<11}{n:>8}{t_j:>12.4f}{t_n:>12.4f}{t_n / t_j:>9.1f}x{diff:>13.2e}")


if __name__ == "__main__":
    main()
