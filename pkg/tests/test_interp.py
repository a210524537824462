from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from ruinlab.exact import exact_orders_3, exact_orders_4
from ruinlab.interp import (
    barycentric,
    interp_distribution,
    interpolate,
    scaled_point,
    select_simplex,
    select_simplex_3,
    select_simplex_4,
    vertex_probability,
)


def test_wsop_weights():
    w = select_simplex_3((169, 301, 817))
    assert w.vertices == ((39, 70, 191), (39, 71, 190), (40, 70, 190))
    assert w.lambdas == (Fraction(190, 429), Fraction(70, 429), Fraction(13, 33))
    assert w.reconstruct() == scaled_point((169, 301, 817), 300)


def test_four_player_weights():
    w = select_simplex_4((97, 125, 144, 1839))
    assert w.vertices == ((4, 5, 7, 84), (4, 6, 6, 84), (4, 6, 7, 83), (5, 6, 6, 83))
    assert w.lambdas == tuple(Fraction(n, 441) for n in (146, 31, 88, 176))


def test_grid_point_collapses_to_one_vertex():
    w = select_simplex((20, 30, 50), 100)
    assert w.vertices == ((20, 30, 50),)
    assert w.lambdas == (1,)


def test_edge_point_uses_two_vertices():
    # (1, 1, 2) scaled to N=30 is (7.5, 7.5, 15): midpoint of a lattice edge
    w = select_simplex((1, 1, 2), 30)
    assert len(w.vertices) == 2
    assert w.lambdas == (Fraction(1, 2), Fraction(1, 2))


def test_barycentric_singular():
    assert barycentric((1, 1, 1), [(1, 1, 1), (1, 1, 1)]) is None


def test_interpolation_reproduces_grid_values(small_table_k3):
    ref = exact_orders_3((6, 9, 15)).as_floats()
    for s, p in ref.items():
        assert interpolate(small_table_k3, (2, 3, 5), s) == pytest.approx(p, abs=1e-15)


def test_face_vertex_solved_directly(small_table_k3):
    assert vertex_probability(small_table_k3, (0, 10, 20), "123") == pytest.approx(2 / 3)
    assert vertex_probability(small_table_k3, (0, 10, 20), "213") == 0.0
    with pytest.raises(ValueError):
        vertex_probability(small_table_k3, (0, 0, 30), "123")


def test_four_player_face_vertex(small_table_k4):
    p = vertex_probability(small_table_k4, (2, 0, 4, 6), (2, 1, 3, 4))
    assert p == pytest.approx(exact_orders_3((2, 4, 6))[(1, 2, 3)], abs=1e-15)


def test_interp_distribution_four_players(small_table_k4):
    dist = interp_distribution(small_table_k4, (2, 3, 3, 4))
    ref = exact_orders_4((2, 3, 3, 4))
    for s in ref.entries:
        assert dist[s] == pytest.approx(ref[s], abs=1e-14)


@settings(max_examples=200, deadline=None)
@given(st.tuples(*[st.integers(1, 500)] * 3), st.integers(20, 60))
def test_weights_are_a_convex_combination(stacks, N_ref):
    point = scaled_point(stacks, N_ref)
    assume(sum(1 for x in point if x < 1) <= 1)
    w = select_simplex(stacks, N_ref)
    assert sum(w.lambdas) == 1
    assert all(l > 0 for l in w.lambdas)
    assert w.reconstruct() == point
    assert all(sum(v) == N_ref for v in w.vertices)


@settings(max_examples=50, deadline=None)
@given(st.tuples(*[st.integers(1, 200)] * 3))
def test_interpolated_distribution_obeys_identities(small_table_k3, stacks):
    point = scaled_point(stacks, small_table_k3.N)
    assume(all(x >= 1 for x in point))
    dist = interp_distribution(small_table_k3, stacks)
    assert dist.total() == pytest.approx(1.0, abs=1e-12)
    assert max(abs(r) for r in dist.identity_residuals(stacks)) < 1e-12
