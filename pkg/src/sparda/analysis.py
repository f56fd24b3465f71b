"""Adversarial-success-probability bounds, their inversion, and cost tables.

Two closed-form upper bounds on the probability that a withholding adversary
defeats m light nodes sampling s symbols each: the original bound and a
recomputed one that accounts for all m players in the first term.  Plus the
per-node byte costs (sampling, header, total download) and report generation
against embedded reference constants.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .reference import load_reference

ORIGINAL = "original"
RECOMPUTED = "recomputed"


class AnalysisError(ValueError):
    pass


class UnreachableTargetError(AnalysisError):
    """No sample count can push the bound below the requested target."""


def binary_entropy(p: float) -> float:
    """Entropy of a Bernoulli(p) bit, base-2 logs, with 0*log(0) = 0."""
    if not 0.0 <= p <= 1.0:
        raise AnalysisError(f"entropy argument {p} outside [0,1]")
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


@dataclass(frozen=True)
class BoundParams:
    """Per-layer undecodable ratios and lengths, player count, samples."""

    alphas: tuple[float, ...]
    n_layers: tuple[int, ...]
    m: int
    s: int

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(self.alphas))
        object.__setattr__(self, "n_layers", tuple(self.n_layers))

    def validate(self) -> None:
        if not self.alphas or len(self.alphas) != len(self.n_layers):
            raise AnalysisError("alphas and n_layers must be nonempty, equal length")
        if any(not 0.0 < a < 1.0 for a in self.alphas):
            raise AnalysisError("each alpha must lie in (0,1)")
        if any(n < 1 for n in self.n_layers):
            raise AnalysisError("layer lengths must be positive")
        if self.m < 1 or self.s < 0:
            raise AnalysisError("need m >= 1 and s >= 0")

    @property
    def alpha_min(self) -> float:
        return min(self.alphas)


def _second_term_exponent(p: BoundParams) -> float:
    return max(
        binary_entropy(a) * n + p.m * p.s * math.log2(1.0 - a)
        for a, n in zip(p.alphas, p.n_layers)
    )


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def _second_term(p: BoundParams) -> float:
    e = _second_term_exponent(p)
    # exponents above 0 clamp to 1; far-negative ones underflow cleanly to 0
    if e >= 0.0:
        return 1.0
    if e < -1100.0:
        return 0.0
    return 2.0 ** e


def asp_bound_original(p: BoundParams) -> float:
    """max of a single-player miss term and the union-style exponential term."""
    p.validate()
    term1 = (1.0 - p.alpha_min) ** p.s
    term2 = _second_term(p)
    return _clamp01(max(term1, term2))


def asp_bound_recomputed(p: BoundParams) -> float:
    """Same second term, first term upgraded to any-of-m-players-accepts."""
    p.validate()
    x = (1.0 - p.alpha_min) ** p.s
    if x >= 1.0:
        term1 = 1.0
    elif x == 0.0:
        term1 = 0.0
    else:
        # 1 - (1-x)^m without cancellation for tiny x
        term1 = -math.expm1(p.m * math.log1p(-x))
    term2 = _second_term(p)
    return _clamp01(max(term1, term2))


_BOUND_FNS = {ORIGINAL: asp_bound_original, RECOMPUTED: asp_bound_recomputed}


def asp_bound(bound: str, p: BoundParams) -> float:
    try:
        fn = _BOUND_FNS[bound]
    except KeyError:
        raise AnalysisError(f"unknown bound {bound!r}") from None
    return fn(p)


def dominance_check(p: BoundParams) -> bool:
    """The recomputed bound never undercuts the original one."""
    orig = asp_bound_original(p)
    rec = asp_bound_recomputed(p)
    return rec >= orig - math.ulp(orig)


_MAX_SAMPLES = 10**9


def min_samples(bound: str, gamma_target: float, p: BoundParams) -> int:
    """Smallest s with bound(s) <= gamma_target (p.s is ignored)."""
    if not 0.0 < gamma_target < 1.0:
        raise AnalysisError(f"target {gamma_target} outside (0,1)")
    fn = _BOUND_FNS.get(bound)
    if fn is None:
        raise AnalysisError(f"unknown bound {bound!r}")

    def value(s: int) -> float:
        return fn(replace(p, s=s))

    hi = 1
    while value(hi) > gamma_target:
        hi *= 2
        if hi > _MAX_SAMPLES:
            raise UnreachableTargetError(
                f"bound stays above {gamma_target} up to s={_MAX_SAMPLES}"
            )
    lo = hi // 2              # value(lo) > target (or lo == 0)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if value(mid) <= gamma_target:
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# byte costs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CostParams:
    block_bytes: float
    base_dimension: int          # data symbols in the base layer
    digest_bytes: int
    batch: int
    rate: float
    root_hashes: int
    digest_bits: int

    def validate(self) -> None:
        if self.block_bytes <= 0 or self.base_dimension < 1:
            raise AnalysisError("block size and base dimension must be positive")
        if self.batch * self.rate <= 1.0:
            raise AnalysisError("need batch*rate > 1 for a finite layer count")
        if self.root_hashes < 1 or self.digest_bytes < 1 or self.digest_bits < 1:
            raise AnalysisError("digest and root parameters must be positive")

    @property
    def layer_count_log(self) -> float:
        """log_{batch*rate} of base_dimension/(rate*root_hashes)."""
        arg = self.base_dimension / (self.rate * self.root_hashes)
        if arg <= 0:
            raise AnalysisError("non-positive layer-count logarithm argument")
        return math.log(arg) / math.log(self.batch * self.rate)


@dataclass(frozen=True)
class SamplingCost:
    total_bytes: float
    symbol_bytes: float          # block_bytes / base_dimension
    proof_bytes_per_layer: float
    layer_count: float


def sampling_breakdown(c: CostParams) -> SamplingCost:
    c.validate()
    symbol = c.block_bytes / c.base_dimension
    per_layer = c.digest_bytes * (c.batch - 1) + c.digest_bytes * c.batch * (1.0 - c.rate)
    layers = c.layer_count_log
    return SamplingCost(symbol + per_layer * layers, symbol, per_layer, layers)


def sampling_cost(s: int, c: CostParams) -> float:
    """Bytes downloaded by one node sampling s symbols with their proofs."""
    if s < 0:
        raise AnalysisError("sample count must be >= 0")
    return s * sampling_breakdown(c).total_bytes


def header_size(c_or_t, digest_bits: Optional[int] = None) -> float:
    """Header bytes: root hash count times digest size."""
    if isinstance(c_or_t, CostParams):
        t, bits = c_or_t.root_hashes, c_or_t.digest_bits
    else:
        if digest_bits is None:
            raise AnalysisError("digest_bits required with a scalar root count")
        t, bits = c_or_t, digest_bits
    if t < 1 or bits < 1:
        raise AnalysisError("root count and digest bits must be positive")
    return t * bits / 8


@dataclass(frozen=True)
class DownloadCost:
    total_bytes: float
    sampling_bytes: float
    header_bytes: float
    fraction_of_block: float


def total_download(s: int, c: CostParams) -> DownloadCost:
    samp = sampling_cost(s, c)
    head = header_size(c)
    total = samp + head
    return DownloadCost(total, samp, head, total / c.block_bytes)


# ---------------------------------------------------------------------------
# table reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TableCell:
    row: str
    column: str
    computed: float
    reference_kind: str          # value | approx_one | approx_zero | exact | verbatim
    reference: Optional[float]
    abs_dev: Optional[float]
    rel_dev: Optional[float]
    ok: bool


@dataclass(frozen=True)
class TableReport:
    table_id: int
    title: str
    params: dict
    cells: tuple[TableCell, ...]

    @property
    def all_ok(self) -> bool:
        return all(c.ok for c in self.cells)


VALUE_REL_TOL = 5e-3             # three significant figures
DOWNLOAD_REL_TOL = 0.15


def _value_cell(row, col, computed, ref) -> TableCell:
    kind = ref["kind"]
    if kind == "value":
        v = ref["v"]
        abs_dev = abs(computed - v)
        rel_dev = abs_dev / abs(v)
        return TableCell(row, col, computed, kind, v, abs_dev, rel_dev,
                         rel_dev <= VALUE_REL_TOL)
    if kind == "approx_one":
        return TableCell(row, col, computed, kind, 1.0, abs(computed - 1.0),
                         None, computed >= 0.99)
    if kind == "approx_zero":
        return TableCell(row, col, computed, kind, 0.0, computed, None,
                         computed <= 1e-30)
    raise AnalysisError(f"unknown reference kind {kind!r}")


def _bound_params(ref, adversary, s) -> BoundParams:
    bp = ref["bound_params"]
    alpha = bp["alpha_weak"] if adversary == "weak" else bp["alpha_strong"]
    return BoundParams((alpha,), (bp["n"],), bp["m"], s)


def _table1(ref) -> TableReport:
    t = ref["table1"]
    cells = []
    for bound in (ORIGINAL, RECOMPUTED):
        for adversary in ("weak", "strong"):
            for i, s in enumerate(t["s_values"]):
                computed = asp_bound(bound, _bound_params(ref, adversary, s))
                cells.append(
                    _value_cell(f"s={s}", f"{bound}/{adversary}", computed,
                                t["cells"][bound][adversary][i])
                )
    return TableReport(1, t["title"], ref["bound_params"], tuple(cells))


def _table2(ref) -> TableReport:
    t = ref["table2"]
    cells = []
    for bound in (ORIGINAL, RECOMPUTED):
        for adversary in ("weak", "strong"):
            for i, gamma in enumerate(t["gammas"]):
                computed = min_samples(
                    bound, gamma, _bound_params(ref, adversary, 1)
                )
                want = t["cells"][bound][adversary][i]
                cells.append(
                    TableCell(f"gamma={gamma:g}", f"{bound}/{adversary}",
                              computed, "exact", want, abs(computed - want),
                              None, computed == want)
                )
    return TableReport(2, t["title"], ref["bound_params"], tuple(cells))


def cost_params_for_table(table_id: int) -> CostParams:
    ref = load_reference()
    t = ref["download_tables"]["tables"][str(table_id)]
    cp = ref["cost_params"]
    return CostParams(
        t["block_bytes"], t["base_dimension"], cp["digest_bytes"], cp["batch"],
        cp["rate"], cp["root_hashes"], cp["digest_bits"],
    )


def _download_table(ref, table_id: int) -> TableReport:
    dt = ref["download_tables"]
    t = dt["tables"][str(table_id)]
    c = cost_params_for_table(table_id)
    cells = []
    for i, gamma in enumerate(dt["gammas"]):
        row = f"gamma={gamma:g}"
        for adversary in ("weak", "strong"):
            s = min_samples(RECOMPUTED, gamma, _bound_params(ref, adversary, 1))
            computed = total_download(s, c).fraction_of_block
            v = t["spar_d_over_b"][adversary][i]
            abs_dev = abs(computed - v)
            rel_dev = abs_dev / abs(v)
            cells.append(
                TableCell(row, f"spar/{adversary} (s={s})", computed, "value",
                          v, abs_dev, rel_dev, rel_dev <= DOWNLOAD_REL_TOL)
            )
        base = t["baseline_d_over_b"][i]
        cells.append(TableCell(row, "baseline", base, "verbatim", base, 0.0,
                               0.0, True))
    head = header_size(c)
    cells.append(
        TableCell("header", "spar_bytes", head, "value",
                  t["spar_header_bytes"], abs(head - t["spar_header_bytes"]),
                  abs(head - t["spar_header_bytes"]) / t["spar_header_bytes"],
                  head == t["spar_header_bytes"])
    )
    cells.append(
        TableCell("header", "baseline_kb", t["baseline_header_kb"], "verbatim",
                  t["baseline_header_kb"], 0.0, 0.0, True)
    )
    title = f"Total download vs block size, B = {t['block_bytes']:g} bytes"
    params = {"block_bytes": t["block_bytes"], "base_dimension": t["base_dimension"]}
    return TableReport(table_id, title, params, tuple(cells))


def reproduce_table(table_id: int) -> TableReport:
    """Recompute one comparison table and report per-cell deviations."""
    ref = load_reference()
    if table_id == 1:
        return _table1(ref)
    if table_id == 2:
        return _table2(ref)
    if table_id in (3, 4, 5):
        return _download_table(ref, table_id)
    raise AnalysisError(f"unknown table id {table_id}")


def table_to_json(report: TableReport) -> str:
    return json.dumps(
        {
            "table_id": report.table_id,
            "title": report.title,
            "params": report.params,
            "all_ok": report.all_ok,
            "cells": [
                {
                    "row": c.row,
                    "column": c.column,
                    "computed": c.computed,
                    "reference_kind": c.reference_kind,
                    "reference": c.reference,
                    "abs_dev": c.abs_dev,
                    "rel_dev": c.rel_dev,
                    "ok": c.ok,
                }
                for c in report.cells
            ],
        },
        indent=2,
    )


def table_to_csv(report: TableReport) -> str:
    out = io.StringIO()
    w = csv.writer(out)
    w.writerow(["row", "column", "computed", "reference_kind", "reference",
                "abs_dev", "rel_dev", "ok"])
    for c in report.cells:
        w.writerow([c.row, c.column, c.computed, c.reference_kind, c.reference,
                    c.abs_dev, c.rel_dev, c.ok])
    return out.getvalue()
