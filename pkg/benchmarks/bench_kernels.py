"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--n 256]
"""
import argparse
import timeit

import numpy as np

from compsense import _backend
from compsense.transform import make_transform


def cases(n):
    rs = np.random.default_rng(0)
    F = np.ascontiguousarray(make_transform("dct", n).matrix)
    y = rs.standard_normal(n)
    mag = rs.standard_normal(8 * n) ** 2
    z = np.zeros(n)
    k = max(1, n // 32)
    return {
        "splitmix64_fill(1e6)": lambda m: m.splitmix64_fill(42, 1_000_000),
        f"top_k_indices(N={8 * n}, k={k})": lambda m: m.top_k_indices(mag, k),
        f"iht_loop_real(n={n}, 50 iters)": lambda m: m.iht_loop_real(F, y, z.copy(), z.copy(), k, k, 50),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=256)
    args = ap.parse_args()

    backends = _backend.available_backends()
    if "cython" not in backends:
        print("compiled kernels not built; only the fallback is timed")
    names = sorted(backends)
    print(f"{'kernel':38s}" + "".join(f"{b:>12s}" for b in names) + ("     speedup" if len(names) > 1 else ""))
    for label, fn in cases(args.n).items():
        best = {}
        for b in names:
            mod = backends[b]
            best[b] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        row = f"{label:38s}" + "".join(f"{best[b] * 1e3:10.3f}ms" for b in names)
        if len(names) > 1:
            row += f"{best['python'] / best['cython']:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
