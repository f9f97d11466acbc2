import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from goldens import NEURON, NEURON_ROW, PIELOU, PIELOU_ROW, ROW_ORDER, SWAMP, SWAMP_ROW
from nnctseg.moments import DegenerateVarianceError, UndefinedStatistic
from nnctseg.table import Nnct
from nnctseg.teststat import (
    CORRECTION,
    StatName,
    ceyhan_z,
    dixon_z,
    pielou_chi2,
    pielou_z,
    pielou_z_corrected,
    run_all,
    statistic_arrays,
    z_one,
    z_two,
)


@pytest.mark.parametrize(
    "data,row", [(PIELOU, PIELOU_ROW), (SWAMP, SWAMP_ROW), (NEURON, NEURON_ROW)],
    ids=["pielou", "swamp", "neuron"],
)
def test_reference_rows(data, row):
    counts, q, r = data
    values = run_all(Nnct.from_counts(counts), q, r)
    got = [values[s] for s in ROW_ORDER]
    assert_allclose(got, row, atol=0.01)


def test_scalar_wrappers_agree_with_run_all():
    counts, q, r = SWAMP
    t = Nnct.from_counts(counts)
    all_ = run_all(t, q, r)
    assert dixon_z(t, q, r, (2, 2)) == all_[StatName.DixonZ22]
    assert ceyhan_z(t, q, r, (1, 1)) == all_[StatName.CeyhanZ11]
    assert z_one(t, q, r) == all_[StatName.ZI]
    assert z_two(t, q, r) == all_[StatName.ZII]
    assert pielou_z(t) ** 2 == pytest.approx(pielou_chi2(t), rel=1e-12)
    zmc, za, zs = pielou_z_corrected(t)
    assert zmc == pytest.approx(pielou_z(t) / CORRECTION.beta_n)
    assert za == all_[StatName.PielouZmcAssoc]
    assert zs == all_[StatName.PielouZmcSeg]


def test_chi2_textbook_value():
    # Cross-check against the usual 2x2 independence chi-square.
    from scipy.stats import chi2_contingency

    counts = np.array([[137, 23], [38, 30]])
    chi2, _, _, _ = chi2_contingency(counts, correction=False)
    assert pielou_chi2(Nnct.from_counts(counts)) == pytest.approx(chi2, rel=1e-12)


def _tables(draw_counts):
    n1, n2, a, b = draw_counts
    return np.array([[a, n1 - a], [b, n2 - b]])


table_strategy = st.tuples(
    st.integers(3, 60), st.integers(3, 60), st.integers(0, 60), st.integers(0, 60)
).filter(lambda x: x[2] <= x[0] and x[3] <= x[1]).map(_tables)


@settings(max_examples=200, deadline=None)
@given(table_strategy, st.floats(0.3, 1.0), st.floats(0.3, 1.0))
def test_antisymmetry_and_chi2_identity(counts, qf, rf):
    n = counts.sum()
    q, r = qf * n, 2 * math.floor(rf * n / 2)
    v = statistic_arrays(counts, q, r)
    for i in (1, 2):
        a, b = v[StatName(f"DixonZ{i}1")], v[StatName(f"DixonZ{i}2")]
        if not math.isnan(a):
            assert a == pytest.approx(-b, abs=1e-9)
    for j in (1, 2):
        a, b = v[StatName(f"CeyhanZ1{j}")], v[StatName(f"CeyhanZ2{j}")]
        if not math.isnan(a):
            assert a == pytest.approx(-b, abs=1e-9)
    if not math.isnan(v[StatName.PielouZ]):
        assert v[StatName.PielouZ] ** 2 == pytest.approx(v[StatName.PielouChi2], abs=1e-9)


def test_stack_equals_single_tables(rng):
    n1, n2 = 20, 30
    a = rng.integers(0, n1 + 1, 50)
    b = rng.integers(0, n2 + 1, 50)
    stack = np.stack([np.array([[x, n1 - x], [y, n2 - y]]) for x, y in zip(a, b)])
    q = rng.uniform(25, 35, 50)
    r = 2 * rng.integers(10, 15, 50)
    vec = statistic_arrays(stack, q, r)
    for k in range(0, 50, 7):
        one = statistic_arrays(stack[k], q[k], r[k])
        for s in StatName:
            assert_allclose(vec[s][k], one[s], equal_nan=True)


def test_mixed_row_sums_rejected():
    with pytest.raises(ValueError):
        statistic_arrays(np.array([[[1, 1], [1, 1]], [[2, 1], [1, 1]]]), 2, 2)


class TestDegenerate:
    def test_empty_column(self):
        t = Nnct.from_counts([[5, 0], [5, 0]])
        with pytest.raises(UndefinedStatistic):
            pielou_z(t)
        values = run_all(t, 6, 4)
        assert math.isnan(values[StatName.ZI])
        assert StatName.ZI in values.errors

    def test_zero_variance(self):
        # n1 = 1: N11 is always 0, so its null variance vanishes.
        t = Nnct.from_counts([[0, 1], [2, 2]])
        with pytest.raises(DegenerateVarianceError):
            dixon_z(t, 2, 2, (1, 1))

    def test_small_n(self):
        t = Nnct.from_counts([[0, 1], [1, 0]])
        values = run_all(t, 0, 2)
        assert math.isnan(values[StatName.DixonZ11])
        assert "n >= 4" in values.errors[StatName.DixonZ11]


def test_parse_names():
    assert StatName.parse("Z_I") is StatName.ZI
    assert StatName.parse("dixonz11") is StatName.DixonZ11
    with pytest.raises(ValueError):
        StatName.parse("nope")


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 100), st.integers(4, 100), st.data())
def test_column_adjusted_statistic_vanishes_at_expectation(n1, n2, data):
    # T_ij has mean zero, so a table with cells equal to k * C_j gives zero.
    n = n1 + n2
    c1 = data.draw(st.integers(1, n - 1))
    a = (n1 - 1) * c1 / (n - 1)
    if a != int(a) or a > n1 or c1 - a > n2 or c1 - a < 0:
        return
    counts = np.array([[int(a), n1 - int(a)], [c1 - int(a), n2 - c1 + int(a)]])
    v = statistic_arrays(counts, 0.63 * n, 0.62 * n)
    assert v[StatName.CeyhanZ11] == pytest.approx(0.0, abs=1e-9)


def _tn_stats(gen, n_rep=200):
    from nnctseg.nngraph import build_nn_digraph
    from nnctseg.table import build_nnct

    out = []
    for seed in range(n_rep):
        p = gen(seed)
        g = build_nn_digraph(p)
        v = statistic_arrays(build_nnct(p, g).counts, g.q, g.r, [StatName.ZI, StatName.ZII])
        out.append([v[StatName.ZI], v[StatName.ZII]])
    return np.array(out)


def test_sign_under_segregation_and_association():
    from nnctseg.pattern import gen_association, gen_segregation

    seg = _tn_stats(lambda s: gen_segregation(50, 50, 1 / 3, seed=s))
    assoc = _tn_stats(lambda s: gen_association(50, 50, 0.1, seed=s))
    se = lambda a: a.std(axis=0, ddof=1) / np.sqrt(len(a))  # noqa: E731
    assert np.all(seg.mean(axis=0) > 3 * se(seg))
    assert np.all(assoc.mean(axis=0) < -3 * se(assoc))


def test_invariant_to_point_storage_order(rng):
    from nnctseg.nngraph import build_nn_digraph
    from nnctseg.pattern import MarkedPattern, gen_csr
    from nnctseg.table import build_nnct

    p = gen_csr(25, 35, seed=12)
    perm = rng.permutation(p.n)
    q = MarkedPattern(p.points[perm], p.labels[perm], p.region)
    ga, gb = build_nn_digraph(p), build_nn_digraph(q)
    a = run_all(build_nnct(p, ga), ga.q, ga.r)
    b = run_all(build_nnct(q, gb), gb.q, gb.r)
    for s in StatName:
        assert a[s] == pytest.approx(b[s], abs=1e-12)
