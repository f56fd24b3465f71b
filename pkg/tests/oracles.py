"""Independent brute-force oracles used by the test suite.

Everything here is deliberately implemented with different representations
than the library (integer bitmasks, exhaustive enumeration) so agreement is
meaningful.
"""

import itertools
import random

import numpy as np

from sparda.codes import SparseParityMatrix

try:
    _popcount64 = np.bitwise_count
except AttributeError:  # numpy < 2.0
    _TABLE = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)

    def _popcount64(a):
        return _TABLE[a.astype(np.uint64).view(np.uint8)].reshape(a.shape + (8,)).sum(axis=-1)


def random_matrix(rng: random.Random, n: int, r: int, row_weight_lo=2,
                  row_weight_hi=4) -> SparseParityMatrix:
    """Random sparse matrix with no empty rows or columns."""
    while True:
        rows = [
            set(rng.sample(range(n), rng.randint(row_weight_lo, min(row_weight_hi, n))))
            for _ in range(r)
        ]
        covered = set().union(*rows)
        for j in range(n):
            if j not in covered:
                rows[rng.randrange(r)].add(j)
        if all(rows):
            return SparseParityMatrix(r, n, rows)


def row_bitmasks(H: SparseParityMatrix) -> np.ndarray:
    return np.array([sum(1 << j for j in row) for row in H.rows], dtype=np.int64)


def has_stopping_subset(H: SparseParityMatrix, erased: list[int]) -> bool:
    """Exhaustively test whether any nonempty subset of ``erased`` is a
    stopping set (every row meets it in != 1 position)."""
    e = len(erased)
    masks = row_bitmasks(H)
    bits = np.arange(1, 1 << e, dtype=np.int64)
    cols = np.array([1 << j for j in erased], dtype=np.int64)
    sub = (((bits[:, None] >> np.arange(e)[None, :]) & 1) * cols[None, :]).sum(axis=1)
    hits = _popcount64(sub[:, None] & masks[None, :])
    return bool((hits != 1).all(axis=1).any())


def gf2_rank_ints(vectors: list[int]) -> int:
    basis = []
    rank = 0
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
            rank += 1
    return rank


def erased_column_rank(H: SparseParityMatrix, erased: list[int]) -> int:
    """GF(2) rank of the check matrix restricted to the erased columns."""
    cols = [sum(1 << i for i in H.cols[j]) for j in erased]
    return gf2_rank_ints(cols)


def min_stopping_set_size(H: SparseParityMatrix, max_size=None) -> int:
    """Exhaustive minimum stopping-set size via bitmask enumeration; 0 if none."""
    n = H.n_cols
    masks = [sum(1 << j for j in row) for row in H.rows]
    limit = max_size or n
    for size in range(1, limit + 1):
        for combo in itertools.combinations(range(n), size):
            m = 0
            for j in combo:
                m |= 1 << j
            if all((row & m).bit_count() != 1 for row in masks):
                return size
    return 0


def erasures_solvable_per_bitplane(H, entries, erased) -> bool:
    """Exists a filling of the erased 1-byte symbols satisfying every check.

    Enumerates all GF(2) assignments independently per bit plane.
    """
    erased = sorted(erased)
    for plane in range(8):
        known = {}
        for j, e in enumerate(entries):
            if j not in erased:
                known[j] = (e[0] >> plane) & 1
        ok = False
        for assign in range(1 << len(erased)):
            vals = dict(known)
            for t, j in enumerate(erased):
                vals[j] = (assign >> t) & 1
            if all(sum(vals[j] for j in row) % 2 == 0 for row in H.rows):
                ok = True
                break
        if not ok:
            return False
    return True
