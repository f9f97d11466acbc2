import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from nnctseg.nngraph import (
    GeometryError,
    NnDigraph,
    build_nn_digraph,
    nearest_neighbors,
    q_decomposition,
)
from nnctseg.pattern import gen_csr, relabel


def brute_nn(xy):
    d2 = ((xy[:, None, :] - xy[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    return d2.argmin(axis=1)  # argmin returns the lowest index among ties


def test_collinear_example():
    g = build_nn_digraph(np.array([[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]]))
    assert_array_equal(g.nn_index, [1, 0, 1])
    assert_array_equal(g.in_degree, [1, 2, 0])
    assert (g.q, g.r) == (2, 2)


def test_lattice_ties_go_to_lowest_index():
    # Every interior point of a grid has four equidistant neighbors.
    xs, ys = np.meshgrid(np.arange(6.0), np.arange(5.0))
    xy = np.column_stack([xs.ravel(), ys.ravel()])
    nn, dist = nearest_neighbors(xy)
    assert_array_equal(nn, brute_nn(xy))
    assert_allclose(dist, 1.0)


def test_duplicate_points_are_neighbors_at_zero():
    xy = np.array([[0.0, 0.0]] * 10 + [[5.0, 5.0]])
    nn, dist = nearest_neighbors(xy)
    assert_array_equal(nn, brute_nn(xy))
    assert dist[0] == 0


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 200), st.integers(0, 2**31 - 1), st.booleans())
def test_matches_brute_force(n, seed, rounded):
    xy = np.random.default_rng(seed).random((n, 2))
    if rounded:
        xy = np.round(xy * 4) / 4  # plenty of exact ties
    nn, _ = nearest_neighbors(xy)
    assert_array_equal(nn, brute_nn(xy))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 200), st.integers(0, 2**31 - 1))
def test_q_r_identities(n, seed):
    g = build_nn_digraph(gen_csr(1, n - 1 if n > 1 else 1, seed=seed))
    assert g.in_degree.sum() == g.n
    assert g.r % 2 == 0
    assert g.r <= g.n
    dec = q_decomposition(g)
    assert 2 * (dec[2] + 3 * dec[3] + 6 * dec[4] + 10 * dec[5] + 15 * dec[6]) == g.q


def test_q_r_invariant_under_relabel():
    p = gen_csr(30, 30, seed=6)
    g = build_nn_digraph(p)
    h = build_nn_digraph(relabel(p, seed=1))
    assert (g.q, g.r) == (h.q, h.r)


def test_in_degree_above_six_is_flagged():
    nn = np.array([1, 0, 0, 0, 0, 0, 0, 0])
    deg = np.bincount(nn, minlength=8)
    g = NnDigraph(nn, np.ones(8), deg, int((deg * (deg - 1)).sum()), 2)
    with pytest.raises(GeometryError):
        q_decomposition(g)


def test_needs_two_points():
    with pytest.raises(ValueError):
        build_nn_digraph(np.zeros((1, 2)))
