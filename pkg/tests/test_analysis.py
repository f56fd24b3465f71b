import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from sparda import analysis as an
from sparda.reference import load_reference


WEAK = an.BoundParams((0.47,), (4096,), 1024, 35)
STRONG = an.BoundParams((0.124,), (4096,), 1024, 200)


def with_s(p, s):
    from dataclasses import replace

    return replace(p, s=s)


def test_binary_entropy_values():
    assert an.binary_entropy(0.5) == 1.0
    assert an.binary_entropy(0.0) == 0.0
    assert an.binary_entropy(1.0) == 0.0
    assert an.binary_entropy(0.124) == pytest.approx(0.54075, abs=1e-4)
    assert an.binary_entropy(0.3) == an.binary_entropy(0.7)
    with pytest.raises(an.AnalysisError):
        an.binary_entropy(-0.1)
    with pytest.raises(an.AnalysisError):
        an.binary_entropy(1.1)


def test_bound_params_validation():
    with pytest.raises(an.AnalysisError):
        an.BoundParams((), (), 1, 1).validate()
    with pytest.raises(an.AnalysisError):
        an.BoundParams((0.5, 0.2), (10,), 1, 1).validate()
    with pytest.raises(an.AnalysisError):
        an.BoundParams((1.0,), (10,), 1, 1).validate()
    with pytest.raises(an.AnalysisError):
        an.BoundParams((0.5,), (10,), 0, 1).validate()


def test_original_bound_independent_recomputation():
    # first term dominates in these cells; checked against direct log10 math
    assert an.asp_bound_original(with_s(WEAK, 8)) == pytest.approx(0.53**8)
    assert an.asp_bound_original(with_s(WEAK, 35)) == pytest.approx(
        10 ** (35 * math.log10(0.53)), rel=1e-12
    )
    assert an.asp_bound_original(with_s(STRONG, 35)) == pytest.approx(
        0.876**35, rel=1e-12
    )


def test_recomputed_bound_small_x_linearization():
    # for tiny x = (1-a)^s, 1-(1-x)^m ~ m*x to first order
    p = with_s(WEAK, 35)
    x = 0.53**35
    got = an.asp_bound_recomputed(p)
    assert got == pytest.approx(1024 * x, rel=1e-3)
    assert got > 1024 * x * (1 - 1e-3)


def test_second_term_can_dominate():
    # many players and few samples: the exponential term takes over
    p = an.BoundParams((0.4,), (100,), 1, 0)
    assert an.asp_bound_original(p) == 1.0
    assert an.asp_bound_recomputed(p) == 1.0


def test_bounds_clamped_to_unit_interval():
    for s in (0, 1, 5, 50, 5000):
        for p in (with_s(WEAK, s), with_s(STRONG, s)):
            for fn in (an.asp_bound_original, an.asp_bound_recomputed):
                v = fn(p)
                assert 0.0 <= v <= 1.0


def test_monotone_in_s():
    for p0 in (WEAK, STRONG):
        vals_o = [an.asp_bound_original(with_s(p0, s)) for s in range(0, 400, 7)]
        vals_r = [an.asp_bound_recomputed(with_s(p0, s)) for s in range(0, 400, 7)]
        assert vals_o == sorted(vals_o, reverse=True)
        assert vals_r == sorted(vals_r, reverse=True)


@settings(max_examples=200, deadline=None)
@given(
    st.floats(0.01, 0.9),
    st.integers(1, 10000),
    st.integers(1, 5000),
    st.integers(0, 3000),
)
def test_dominance_property(alpha, n, m, s):
    p = an.BoundParams((alpha,), (n,), m, s)
    assert an.dominance_check(p)


def test_min_samples_consistency():
    p = an.BoundParams((0.47,), (4096,), 1024, 1)
    for bound in (an.ORIGINAL, an.RECOMPUTED):
        for gamma in (1e-2, 1e-6):
            s = an.min_samples(bound, gamma, p)
            assert an.asp_bound(bound, with_s(p, s)) <= gamma
            assert an.asp_bound(bound, with_s(p, s - 1)) > gamma


def test_min_samples_errors():
    p = an.BoundParams((0.47,), (4096,), 1024, 1)
    with pytest.raises(an.AnalysisError):
        an.min_samples(an.ORIGINAL, 0.0, p)
    with pytest.raises(an.AnalysisError):
        an.min_samples("bogus", 0.5, p)
    slow = an.BoundParams((1e-9,), (4096,), 1, 1)
    with pytest.raises(an.UnreachableTargetError):
        an.min_samples(an.ORIGINAL, 1e-2, slow)


def _table3_params():
    return an.CostParams(1e6, 1024, 32, 8, 0.25, 256, 256)


def test_sampling_cost_literal_value():
    c = _table3_params()
    br = an.sampling_breakdown(c)
    assert br.symbol_bytes == pytest.approx(976.5625)
    assert br.proof_bytes_per_layer == pytest.approx(416.0)
    assert br.layer_count == pytest.approx(4.0)
    assert an.sampling_cost(1, c) == pytest.approx(2640.5625)
    assert an.sampling_cost(0, c) == 0.0
    assert an.sampling_cost(34, c) == pytest.approx(2 * an.sampling_cost(17, c))
    with pytest.raises(an.AnalysisError):
        an.sampling_cost(-1, c)


def test_header_size_forms():
    assert an.header_size(256, 256) == 8192
    assert an.header_size(1, 256) == 32
    assert an.header_size(512, 256) == 16384
    assert an.header_size(_table3_params()) == 8192
    with pytest.raises(an.AnalysisError):
        an.header_size(0, 256)
    with pytest.raises(an.AnalysisError):
        an.header_size(5)


def test_total_download_composition():
    c = _table3_params()
    d = an.total_download(19, c)
    assert d.total_bytes == pytest.approx(d.sampling_bytes + d.header_bytes)
    assert d.header_bytes == 8192
    assert d.fraction_of_block == pytest.approx(d.total_bytes / 1e6)
    d0 = an.total_download(0, c)
    assert d0.total_bytes == d0.header_bytes


def test_cost_params_validation():
    with pytest.raises(an.AnalysisError):
        an.CostParams(1e6, 1024, 32, 4, 0.25, 256, 256).validate()  # batch*rate = 1
    with pytest.raises(an.AnalysisError):
        an.CostParams(-1, 1024, 32, 8, 0.25, 256, 256).validate()


def test_reference_data_shape():
    ref = load_reference()
    assert ref["bound_params"]["m"] == 1024
    assert set(ref["download_tables"]["tables"]) == {"3", "4", "5"}


def test_reproduce_all_tables():
    for tid in (1, 2, 3, 4, 5):
        report = an.reproduce_table(tid)
        assert report.all_ok, [c for c in report.cells if not c.ok]
    with pytest.raises(an.AnalysisError):
        an.reproduce_table(6)


def test_table_export_formats():
    report = an.reproduce_table(2)
    obj = json.loads(an.table_to_json(report))
    assert obj["table_id"] == 2 and obj["all_ok"]
    assert len(obj["cells"]) == 12
    csv_text = an.table_to_csv(report)
    lines = csv_text.strip().split("\n")
    assert len(lines) == 13
    assert lines[0].startswith("row,column,computed")


def test_expm1_linearization_invariant():
    # for tiny x, the safe evaluation of 1-(1-x)^m tracks m*x closely
    for x in (1e-9, 1e-10, 1e-12):
        m = 1000
        safe = -math.expm1(m * math.log1p(-x))
        assert safe == pytest.approx(m * x, rel=1e-6)
