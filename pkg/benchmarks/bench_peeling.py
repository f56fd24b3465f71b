"""Benchmark: compiled vs pure-Python peeling kernel on large random codes.

Run:  python benchmarks/bench_peeling.py [--n 4096] [--trials 20]
"""

import argparse
import time

import numpy as np

from sparda._peel_py import peel_residual as peel_py
from sparda.codes import EnsembleParams, generate_ensemble_code

try:
    from sparda._peel_core import peel_residual as peel_cy
except ImportError:
    peel_cy = None


def run(kernel, H, masks):
    row_ptr, row_idx, col_ptr, col_idx = H.csr()
    start = time.perf_counter()
    sizes = [
        len(kernel(H.n_rows, H.n_cols, row_ptr, row_idx, col_ptr, col_idx, m))
        for m in masks
    ]
    return time.perf_counter() - start, sizes


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=4096)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--fraction", type=float, default=0.45)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    H = generate_ensemble_code(EnsembleParams(args.n, 0.25, 6, 8, args.seed))
    rng = np.random.default_rng(args.seed)
    masks = []
    n_erase = int(args.fraction * args.n)
    for _ in range(args.trials):
        mask = np.zeros(args.n, dtype=np.uint8)
        mask[rng.choice(args.n, size=n_erase, replace=False)] = 1
        masks.append(mask)

    t_py, sizes_py = run(peel_py, H, masks)
    print(f"python  kernel: {t_py:.4f} s  ({args.trials} trials, n={args.n})")
    if peel_cy is None:
        print("compiled kernel: not built")
        return
    t_cy, sizes_cy = run(peel_cy, H, masks)
    assert sizes_py == sizes_cy, "kernels disagree"
    print(f"compiled kernel: {t_cy:.4f} s  (speedup {t_py / t_cy:.1f}x)")


if __name__ == "__main__":
    main()
