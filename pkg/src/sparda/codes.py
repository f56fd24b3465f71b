"""Sparse erasure codes: ensemble generation, encoding, peeling, stopping sets.

Symbols are opaque byte strings; parity coefficients live in GF(2), so all
symbol arithmetic is byte-wise XOR.  Indices are 0-based throughout the API
(the alist serialization converts to the conventional 1-based form on disk).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .kernel import peel_residual


class CodeError(Exception):
    """Base class for code-layer failures."""


class ParameterError(CodeError):
    """Invalid ensemble or operation parameters."""


class SingularParityError(CodeError):
    """The parity-column submatrix is not invertible over GF(2)."""


class MaskingError(CodeError):
    """A single error cannot be masked (some touched check has weight 1)."""


def xor_bytes(a: bytes, b: bytes) -> bytes:
    if len(a) != len(b):
        raise ParameterError(f"symbol length mismatch: {len(a)} vs {len(b)}")
    return (int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).to_bytes(len(a), "big")


@dataclass(frozen=True)
class EnsembleParams:
    """Parameters of the random sparse-graph code ensemble."""

    n: int
    rate: float
    v_max: int
    w_max: int
    seed: int = 0

    @property
    def n_rows(self) -> int:
        r = self.n * (1.0 - self.rate)
        ri = round(r)
        if abs(r - ri) > 1e-9:
            raise ParameterError(f"n*(1-rate) = {r} is not an integer")
        return ri

    def validate(self) -> None:
        if not 0.0 < self.rate < 1.0:
            raise ParameterError(f"rate must be in (0,1), got {self.rate}")
        if self.n < 2 or self.v_max < 1 or self.w_max < 1:
            raise ParameterError("n, v_max, w_max must be positive")
        r = self.n_rows
        if r < 1 or r >= self.n:
            raise ParameterError(f"need 0 < r < n, got r={r}, n={self.n}")
        if self.v_max * self.n != self.w_max * r:
            raise ParameterError(
                f"socket identity violated: v*n={self.v_max * self.n} != "
                f"w*r={self.w_max * r}"
            )


class SparseParityMatrix:
    """Row/column adjacency view of a sparse parity-check matrix over GF(2)."""

    def __init__(self, n_rows, n_cols, rows, cols=None, meta=None):
        self.n_rows = int(n_rows)
        self.n_cols = int(n_cols)
        self.rows = tuple(tuple(sorted(set(r))) for r in rows)
        if cols is None:
            cols = _cols_from_rows(self.n_rows, self.n_cols, self.rows)
        self.cols = tuple(tuple(sorted(set(c))) for c in cols)
        self.meta = dict(meta or {})
        self._csr = None
        self._row_masks = None
        self.validate()

    @property
    def k(self) -> int:
        return self.n_cols - self.n_rows

    def validate(self) -> None:
        if self.n_rows >= self.n_cols:
            raise ParameterError("need r < n")
        if len(self.rows) != self.n_rows or len(self.cols) != self.n_cols:
            raise ParameterError("adjacency lengths disagree with dimensions")
        if any(not r for r in self.rows):
            raise ParameterError("empty row")
        if any(not c for c in self.cols):
            raise ParameterError("empty column")
        if self.cols != _cols_from_rows(self.n_rows, self.n_cols, self.rows):
            raise ParameterError("row/column adjacency describe different matrices")
        for r in self.rows:
            if r[0] < 0 or r[-1] >= self.n_cols:
                raise ParameterError("column index out of range")

    def csr(self):
        """CSR-style int32 arrays (row_ptr, row_idx, col_ptr, col_idx)."""
        if self._csr is None:
            row_ptr = np.zeros(self.n_rows + 1, dtype=np.int32)
            for i, r in enumerate(self.rows):
                row_ptr[i + 1] = row_ptr[i] + len(r)
            row_idx = np.fromiter(
                (j for r in self.rows for j in r), dtype=np.int32, count=row_ptr[-1]
            )
            col_ptr = np.zeros(self.n_cols + 1, dtype=np.int32)
            for j, c in enumerate(self.cols):
                col_ptr[j + 1] = col_ptr[j] + len(c)
            col_idx = np.fromiter(
                (i for c in self.cols for i in c), dtype=np.int32, count=col_ptr[-1]
            )
            self._csr = (row_ptr, row_idx, col_ptr, col_idx)
        return self._csr

    def row_masks(self) -> list[int]:
        """Rows as bitmask integers over column indices."""
        if self._row_masks is None:
            self._row_masks = [sum(1 << j for j in r) for r in self.rows]
        return self._row_masks

    def __eq__(self, other):
        return (
            isinstance(other, SparseParityMatrix)
            and self.n_rows == other.n_rows
            and self.n_cols == other.n_cols
            and self.rows == other.rows
        )

    def __repr__(self):
        return f"SparseParityMatrix(r={self.n_rows}, n={self.n_cols})"


def _cols_from_rows(n_rows, n_cols, rows):
    cols = [[] for _ in range(n_cols)]
    for i, r in enumerate(rows):
        for j in r:
            cols[j].append(i)
    return tuple(tuple(c) for c in cols)


ERASED = None


class LayerWord:
    """A length-n word of fixed-size byte symbols, each known or erased."""

    def __init__(self, entries: Sequence[Optional[bytes]]):
        self.entries = list(entries)
        sizes = {len(e) for e in self.entries if e is not None}
        if len(sizes) > 1:
            raise ParameterError(f"non-uniform symbol lengths: {sorted(sizes)}")
        self.symbol_size = sizes.pop() if sizes else 0

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def erased_positions(self) -> frozenset[int]:
        return frozenset(i for i, e in enumerate(self.entries) if e is None)

    def copy(self) -> "LayerWord":
        return LayerWord(list(self.entries))

    def with_erasures(self, positions: Iterable[int]) -> "LayerWord":
        out = list(self.entries)
        for p in positions:
            out[p] = None
        return LayerWord(out)

    def __eq__(self, other):
        return isinstance(other, LayerWord) and self.entries == other.entries


@dataclass(frozen=True)
class StoppingSetReport:
    positions: frozenset[int]
    is_stopping: bool
    size_ratio: float

    @classmethod
    def none_found(cls) -> "StoppingSetReport":
        return cls(frozenset(), False, 0.0)


@dataclass(frozen=True)
class ErrorPattern:
    """Sparse symbol errors plus an erasure set with disjoint supports."""

    errors: dict[int, bytes] = field(default_factory=dict)
    erasures: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        overlap = set(self.errors) & self.erasures
        if overlap:
            raise ParameterError(f"error/erasure supports overlap: {sorted(overlap)}")


@dataclass(frozen=True)
class Decoded:
    word: LayerWord


@dataclass(frozen=True)
class Stuck:
    report: StoppingSetReport


@dataclass(frozen=True)
class Inconsistent:
    failed_rows: frozenset[int]


def generate_ensemble_code(params: EnsembleParams) -> SparseParityMatrix:
    """Draw one code from the socket-model ensemble.

    Each column exposes v_max sockets and each row w_max sockets; a seeded
    uniform permutation pairs them and duplicate edges collapse, which is why
    the resulting degrees are "at most" v_max / w_max.
    """
    params.validate()
    r = params.n_rows
    rng = random.Random(params.seed)
    col_sockets = [j for j in range(params.n) for _ in range(params.v_max)]
    row_sockets = [i for i in range(r) for _ in range(params.w_max)]
    rng.shuffle(row_sockets)
    rows: list[set[int]] = [set() for _ in range(r)]
    for j, i in zip(col_sockets, row_sockets):
        rows[i].add(j)
    return SparseParityMatrix(
        r,
        params.n,
        rows,
        meta={
            "ensemble": {
                "n": params.n,
                "rate": params.rate,
                "v_max": params.v_max,
                "w_max": params.w_max,
                "seed": params.seed,
            },
            "seed_used": params.seed,
            "retries": 0,
        },
    )


def _parity_elimination(H: SparseParityMatrix, rhs: Optional[list[bytes]]):
    """Gauss-Jordan over GF(2) on the last-r-columns submatrix.

    Returns the parity symbols (when ``rhs`` is given) or None; raises
    SingularParityError if the submatrix has no inverse.
    """
    r, k = H.n_rows, H.k
    masks = []
    vals: list[Optional[bytes]] = []
    for i, row in enumerate(H.rows):
        m = 0
        for j in row:
            if j >= k:
                m |= 1 << (j - k)
        masks.append(m)
        vals.append(rhs[i] if rhs is not None else None)

    pivot_row_of_col = [-1] * r
    assigned = [False] * r
    for c in range(r):
        bit = 1 << c
        piv = -1
        for i in range(r):
            if not assigned[i] and masks[i] & bit:
                piv = i
                break
        if piv < 0:
            raise SingularParityError(f"no pivot for parity column {c}")
        assigned[piv] = True
        pivot_row_of_col[c] = piv
        for i in range(r):
            if i != piv and masks[i] & bit:
                masks[i] ^= masks[piv]
                if rhs is not None:
                    vals[i] = xor_bytes(vals[i], vals[piv])

    if rhs is None:
        return None
    return [vals[pivot_row_of_col[c]] for c in range(r)]


def parity_part_invertible(H: SparseParityMatrix) -> bool:
    try:
        _parity_elimination(H, None)
        return True
    except SingularParityError:
        return False


def generate_systematic_code(
    params: EnsembleParams, max_retries: int = 1000
) -> SparseParityMatrix:
    """Draw ensemble codes until one has an invertible parity part.

    The seed is incremented on each retry; the matrix metadata records the
    seed actually used and the retry count.
    """
    for attempt in range(max_retries):
        p = EnsembleParams(params.n, params.rate, params.v_max, params.w_max,
                           params.seed + attempt)
        H = generate_ensemble_code(p)
        if parity_part_invertible(H):
            H.meta["seed_used"] = p.seed
            H.meta["retries"] = attempt
            return H
    raise SingularParityError(
        f"no encodable code found in {max_retries} attempts from seed {params.seed}"
    )


def systematic_encode(H: SparseParityMatrix, data: Sequence[bytes]) -> LayerWord:
    """Encode k data symbols into a codeword with the data in front."""
    k = H.k
    if len(data) != k:
        raise ParameterError(f"expected {k} data symbols, got {len(data)}")
    sizes = {len(d) for d in data}
    if len(sizes) != 1:
        raise ParameterError("data symbols must share one length")
    size = sizes.pop()
    zero = bytes(size)
    rhs = []
    for row in H.rows:
        acc = zero
        for j in row:
            if j < k:
                acc = xor_bytes(acc, data[j])
        rhs.append(acc)
    parity = _parity_elimination(H, rhs)
    return LayerWord(list(data) + parity)


def check_syndrome(H: SparseParityMatrix, word: LayerWord):
    """(all_satisfied, failed_rows) for an erasure-free word."""
    if len(word) != H.n_cols:
        raise ParameterError("word length does not match code length")
    if word.erased_positions():
        raise ParameterError("check_syndrome requires an erasure-free word")
    zero = bytes(word.symbol_size)
    failed = set()
    for i, row in enumerate(H.rows):
        acc = zero
        for j in row:
            acc = xor_bytes(acc, word[j])
        if acc != zero:
            failed.add(i)
    return (not failed, frozenset(failed))


def peel_decode(H: SparseParityMatrix, word: LayerWord):
    """Peel erasures; returns Decoded, Stuck, or Inconsistent.

    Sweeps process rows in ascending index; a sweep repeats until a full
    pass makes no progress.  The decoded/stuck outcome is order-independent,
    the fixed order only pins down intermediate states for testing.
    """
    if len(word) != H.n_cols:
        raise ParameterError("word length does not match code length")
    entries = list(word.entries)
    counts = [sum(1 for j in row if entries[j] is None) for row in H.rows]
    size = word.symbol_size
    zero = bytes(size)

    progress = True
    while progress:
        progress = False
        for i, row in enumerate(H.rows):
            if counts[i] != 1:
                continue
            pos = next(j for j in row if entries[j] is None)
            acc = zero
            for j in row:
                if j != pos:
                    acc = xor_bytes(acc, entries[j])
            entries[pos] = acc
            for ri in H.cols[pos]:
                counts[ri] -= 1
            progress = True

    failed = set()
    for i, row in enumerate(H.rows):
        if counts[i] == 0:
            acc = zero
            for j in row:
                acc = xor_bytes(acc, entries[j])
            if acc != zero:
                failed.add(i)
    if failed:
        return Inconsistent(frozenset(failed))

    residual = frozenset(j for j, e in enumerate(entries) if e is None)
    if residual:
        return Stuck(
            StoppingSetReport(residual, True, len(residual) / H.n_cols)
        )
    return Decoded(LayerWord(entries))


def peel_pattern(H: SparseParityMatrix, erased: Iterable[int]) -> frozenset[int]:
    """Structure-only peeling: the maximal stopping set inside ``erased``."""
    row_ptr, row_idx, col_ptr, col_idx = H.csr()
    mask = np.zeros(H.n_cols, dtype=np.uint8)
    for p in erased:
        mask[p] = 1
    residual = peel_residual(H.n_rows, H.n_cols, row_ptr, row_idx,
                             col_ptr, col_idx, mask)
    return frozenset(int(x) for x in residual)


def is_stopping_set(H: SparseParityMatrix, positions) -> bool:
    """True iff no check meets ``positions`` in exactly one index."""
    pos = set(positions)
    if not pos:
        raise ParameterError("empty position set")
    if min(pos) < 0 or max(pos) >= H.n_cols:
        raise ParameterError("position out of range")
    touched = set()
    for p in pos:
        touched.update(H.cols[p])
    for i in touched:
        if sum(1 for j in H.rows[i] if j in pos) == 1:
            return False
    return True


EXHAUSTIVE_CUTOFF = 24


def find_small_stopping_set(
    H: SparseParityMatrix, trials: int = 50, seed: int = 0
) -> StoppingSetReport:
    """Search for a small stopping set.

    For n <= EXHAUSTIVE_CUTOFF the true minimum is found by ascending-size
    enumeration.  Otherwise: erase a random fraction near the decoding
    threshold, peel, and greedily shrink the residual stopping set; the
    smallest set over all trials is reported.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    n = H.n_cols
    if n <= EXHAUSTIVE_CUTOFF:
        for size in range(1, n + 1):
            for combo in itertools.combinations(range(n), size):
                if is_stopping_set(H, combo):
                    return StoppingSetReport(frozenset(combo), True, size / n)
        return StoppingSetReport.none_found()

    rng = random.Random(seed)
    best: Optional[frozenset[int]] = None
    for _ in range(trials):
        f = rng.uniform(0.35, 0.7)
        erased = rng.sample(range(n), max(1, int(f * n)))
        residual = peel_pattern(H, erased)
        if not residual:
            continue
        shrunk = _greedy_shrink(H, residual, rng)
        if best is None or len(shrunk) < len(best):
            best = shrunk
    if best is None:
        return StoppingSetReport.none_found()
    return StoppingSetReport(best, True, len(best) / n)


def _greedy_shrink(H, stopping: frozenset[int], rng) -> frozenset[int]:
    """Drop positions while the set stays a stopping set (minimal, not minimum)."""
    members = set(stopping)
    counts = {}
    for p in members:
        for i in H.cols[p]:
            counts[i] = counts.get(i, 0) + 1
    changed = True
    while changed:
        changed = False
        order = sorted(members)
        rng.shuffle(order)
        for p in order:
            # Removing p turns any count-2 check into a count-1 violation.
            if any(counts[i] == 2 for i in H.cols[p]):
                continue
            members.discard(p)
            for i in H.cols[p]:
                counts[i] -= 1
            changed = True
    return frozenset(members)


def estimate_erasure_threshold(
    H: SparseParityMatrix,
    fractions: Sequence[float],
    trials_per_point: int,
    seed: int = 0,
):
    """Empirical decoding-failure curve over uniform random erasure patterns."""
    if trials_per_point < 1:
        raise ParameterError("trials_per_point must be >= 1")
    n = H.n_cols
    curve = []
    for pi, f in enumerate(fractions):
        if not 0.0 <= f <= 1.0:
            raise ParameterError(f"fraction {f} outside [0,1]")
        n_erase = int(f * n)
        failures = 0
        for t in range(trials_per_point):
            rng = np.random.default_rng(np.random.SeedSequence([seed, pi, t]))
            erased = rng.choice(n, size=n_erase, replace=False)
            if peel_pattern(H, erased):
                failures += 1
        curve.append((f, failures / trials_per_point))
    return curve


def mask_single_error(H: SparseParityMatrix, error_pos: int) -> frozenset[int]:
    """Greedy erasure set hiding a single symbol error from plain check tests.

    Every check touching ``error_pos`` gets at least one erased other member,
    so no fully-known check can expose the error; shared members are reused,
    keeping the set size at most the column weight of ``error_pos``.
    """
    if not 0 <= error_pos < H.n_cols:
        raise ParameterError("error position out of range")
    uncovered = set(H.cols[error_pos])
    for i in uncovered:
        if len(H.rows[i]) == 1:
            raise MaskingError(f"check {i} touches only the error position")
    chosen: set[int] = set()
    while uncovered:
        coverage: dict[int, set[int]] = {}
        for i in uncovered:
            for j in H.rows[i]:
                if j != error_pos:
                    coverage.setdefault(j, set()).add(i)
        best = max(sorted(coverage), key=lambda j: len(coverage[j]))
        chosen.add(best)
        uncovered -= coverage[best]
    return frozenset(chosen)


def gf2_rank(rows: Sequence[int]) -> int:
    rank = 0
    basis: list[int] = []
    for r in rows:
        for b in basis:
            r = min(r, r ^ b)
        if r:
            basis.append(r)
            basis.sort(reverse=True)
            rank += 1
    return rank


def consistency_check(
    H: SparseParityMatrix, pattern: ErrorPattern, codeword: LayerWord
):
    """Rank test for solvability of the erasure system after injected errors.

    Returns (consistent, rank_lhs, rank_aug): the erasure-restricted check
    matrix vs its augmentation by the syndrome of the corrupted known
    symbols; the system admits a filling of the erasures iff the ranks match.
    """
    if codeword.erased_positions():
        raise ParameterError("codeword must be complete")
    size = codeword.symbol_size
    x = list(codeword.entries)
    for j, delta in pattern.errors.items():
        x[j] = xor_bytes(x[j], delta)
    erased = sorted(pattern.erasures)
    bit_of = {j: t for t, j in enumerate(erased)}
    sym_bits = 8 * size
    lhs_rows = []
    aug_rows = []
    zero = bytes(size)
    for row in H.rows:
        mask = 0
        acc = zero
        for j in row:
            if j in bit_of:
                mask |= 1 << bit_of[j]
            else:
                acc = xor_bytes(acc, x[j])
        lhs_rows.append(mask)
        aug_rows.append((mask << sym_bits) | int.from_bytes(acc, "big"))
    rank_lhs = gf2_rank(lhs_rows)
    rank_aug = gf2_rank(aug_rows)
    return (rank_lhs == rank_aug, rank_lhs, rank_aug)
