import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from goldens import NEURON, NEURON_P_ASSOC, NEURON_P_SEG, NEURON_P_TWO, ROW_ORDER
from nnctseg.inference import (
    Alternative,
    count_extreme,
    p_asymptotic,
    p_montecarlo,
    p_randomization,
    permuted_tables,
    run_tests,
    simulate_csr_tables,
)
from nnctseg.nngraph import build_nn_digraph
from nnctseg.pattern import UNIT_SQUARE, MarkedPattern, Region, gen_csr, gen_segregation
from nnctseg.table import Nnct, nnct_counts
from nnctseg.teststat import StatName, run_all


@pytest.mark.parametrize(
    "alt,expected",
    [(Alternative.TwoSided, NEURON_P_TWO), (Alternative.RightSided, NEURON_P_SEG),
     (Alternative.LeftSided, NEURON_P_ASSOC)],
)
def test_neuron_asymptotic_p_values(alt, expected):
    counts, q, r = NEURON
    values = run_all(Nnct.from_counts(counts), q, r)
    for s, want in zip(ROW_ORDER, expected):
        if want is not None:
            assert p_asymptotic(values[s], s, alt) == pytest.approx(want, abs=5e-4), s


def test_chi2_is_two_sided_only():
    assert p_asymptotic(3.84, StatName.PielouChi2, "two") == pytest.approx(0.05, abs=1e-3)
    with pytest.raises(ValueError):
        p_asymptotic(3.84, StatName.PielouChi2, "seg")


def test_alternative_aliases():
    assert Alternative.parse("Right") is Alternative.RightSided
    assert Alternative.parse("association") is Alternative.LeftSided
    with pytest.raises(ValueError):
        Alternative.parse("up")


def test_count_extreme_directions():
    sims = np.array([-2.0, -1.0, 0.0, 1.0, 2.0, np.nan])
    assert count_extreme(1.0, sims, StatName.ZI, Alternative.RightSided) == (2, 5)
    assert count_extreme(1.0, sims, StatName.ZI, Alternative.LeftSided) == (4, 5)
    assert count_extreme(-1.0, sims, StatName.ZI, Alternative.TwoSided) == (4, 5)


def test_two_point_randomization_enumerates_both_labelings():
    p = MarkedPattern([[0.0, 0.0], [1.0, 0.0]], [1, 2], Region(0, 0, 1, 1))
    # Both labelings give the same table, so every replicate ties.
    p_val = p_randomization(p, StatName.PielouChi2, "two", n_mc=50, seed=1)
    assert p_val == 1.0


def test_permuted_tables_keep_class_sizes():
    p = gen_csr(12, 18, seed=4)
    g = build_nn_digraph(p)
    counts = permuted_tables(p.labels, g.nn_index, 300, seed=2)
    assert counts.shape == (300, 2, 2)
    assert np.all(counts.sum(axis=2) == [12, 18])


def test_results_independent_of_workers():
    a = simulate_csr_tables(10, 15, UNIT_SQUARE, 40, seed=9, workers=1)
    b = simulate_csr_tables(10, 15, UNIT_SQUARE, 40, seed=9, workers=3)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)
    p = gen_csr(10, 10, seed=0)
    g = build_nn_digraph(p)
    np.testing.assert_array_equal(permuted_tables(p.labels, g.nn_index, 25, 3, workers=1),
                                  permuted_tables(p.labels, g.nn_index, 25, 3, workers=2))


def test_simulated_q_r_are_per_replicate():
    counts, q, r = simulate_csr_tables(20, 20, UNIT_SQUARE, 30, seed=5)
    assert len(set(q.tolist())) > 1
    assert np.all(r % 2 == 0) and np.all(r <= 40)


def test_p_value_floor_and_ceiling():
    p = gen_segregation(30, 30, 1 / 3, seed=7)
    n_mc = 99
    pv = p_montecarlo(p, StatName.ZI, "seg", n_mc, seed=1)
    assert pv == pytest.approx(1 / (n_mc + 1))
    pr = p_randomization(p, StatName.ZI, "seg", n_mc, seed=1)
    assert pr == pytest.approx(1 / (n_mc + 1))


def test_randomization_uses_fixed_nn_graph():
    p = gen_csr(15, 15, seed=3)
    g = build_nn_digraph(p)
    obs = nnct_counts(p.labels, g.nn_index)
    assert obs.sum() == 30
    rep = run_tests(p, [StatName.ZII], ["two"], engines=("asy", "rand"), n_mc=200, seed=4)[0]
    assert 0 < rep.p_rand <= 1
    assert rep.n_replicates == 200


def test_run_tests_shape_and_engines():
    p = gen_csr(25, 25, seed=8)
    reps = run_tests(p, [StatName.ZI, StatName.PielouChi2], ["two", "seg"], engines=("asy",))
    # chi-square only appears for the two-sided alternative
    assert [(r.name, r.alternative) for r in reps] == [
        (StatName.ZI, Alternative.TwoSided), (StatName.PielouChi2, Alternative.TwoSided),
        (StatName.ZI, Alternative.RightSided),
    ]
    assert all(r.p_mc is None and r.p_rand is None for r in reps)


def test_run_tests_reports_undefined():
    # With n = 3 the moment-based statistics are undefined.
    p = MarkedPattern([[0, 0], [0, 1], [5, 5]], [1, 1, 2], Region(0, 0, 5, 5))
    rep = run_tests(p, [StatName.ZI], ["two"])[0]
    assert math.isnan(rep.value) and rep.error


def test_invalid_n_mc():
    p = gen_csr(5, 5, seed=0)
    with pytest.raises(ValueError):
        p_montecarlo(p, StatName.ZI, "two", 0, seed=0)


def test_mc_p_close_to_asymptotic_for_moderate_n():
    p = gen_csr(40, 40, seed=21)
    rep = run_tests(p, [StatName.ZII], ["two"], engines=("asy", "mc", "rand"),
                    n_mc=1000, seed=5)[0]
    assert_allclose([rep.p_mc, rep.p_rand], rep.p_asy, atol=0.1)


@pytest.mark.parametrize("z", [-6.0, -1.3, 0.0, 0.4, 2.5, 7.5])
def test_one_sided_p_values_are_complementary(z):
    right = p_asymptotic(z, StatName.ZI, "seg")
    left = p_asymptotic(z, StatName.ZI, "assoc")
    assert right + left == pytest.approx(1.0, abs=1e-15)


def test_randomization_null_calibration():
    hits = 0
    for seed in range(1000):
        p = gen_csr(50, 50, seed=seed)
        hits += p_randomization(p, StatName.CeyhanZ11, "two", n_mc=99, seed=seed) <= 0.05
    assert 0.03 <= hits / 1000 <= 0.07
