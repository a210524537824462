import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import P_1_1_48_321, order_probabilities
from ruinlab.core import all_orders
from ruinlab.exact import (
    CapExceeded,
    build_state_space,
    compositions,
    exact_orders_3,
    exact_orders_4,
    poisson_kernel,
)


def test_state_counts():
    space = build_state_space(3, 50)
    assert space.n_states == 1326
    assert space.n_interior == 1176
    assert space.n_boundary == 3 * 49
    assert len(compositions(10, 4)) == 84  # all parts positive


def test_rational_small_case():
    dist = exact_orders_3((1, 2, 3), exact=True)
    assert dist[(3, 2, 1)] == Fraction(569, 9456)
    assert dist.total() == 1


@pytest.mark.parametrize("stacks", [(1, 1, 1), (1, 2, 3), (2, 2, 5), (3, 1, 4)])
def test_three_players_match_bruteforce(stacks):
    ref = order_probabilities(stacks)
    rational = exact_orders_3(stacks, exact=True)
    floats = exact_orders_3(stacks)
    for s in all_orders(3):
        assert rational[s] == ref[s]
        assert floats[s] == pytest.approx(float(ref[s]), abs=1e-15)


@pytest.mark.parametrize("stacks", [(1, 1, 1, 1), (1, 1, 1, 2), (1, 2, 1, 2)])
def test_four_players_match_bruteforce(stacks):
    ref = order_probabilities(stacks)
    dist = exact_orders_4(stacks)
    for s in all_orders(4):
        assert dist[s] == pytest.approx(float(ref[s]), abs=1e-14)


def test_tail_value_matches_decimal_solve():
    value = exact_orders_3((1, 1, 48))[(3, 2, 1)]
    assert abs(value - P_1_1_48_321) <= 1e-18


def test_poisson_kernel_is_a_distribution():
    kernel = poisson_kernel((3, 4, 5))
    total = sum(kernel.values())
    assert total == pytest.approx(1.0, abs=1e-14)
    assert all(sum(1 for v in face if v == 0) == 1 for face in kernel)


def test_cap_is_enforced():
    with pytest.raises(CapExceeded):
        exact_orders_3((100, 100, 100))
    with pytest.raises(CapExceeded):
        exact_orders_4((10, 20, 30, 40))
    assert exact_orders_3((1, 1, 298), max_N=300)[(3, 2, 1)] > 0


def test_zero_stack_rejected():
    with pytest.raises(ValueError):
        exact_orders_3((0, 2, 3))


@settings(max_examples=40, deadline=None)
@given(st.tuples(*[st.integers(1, 15)] * 3))
def test_identities_and_total(stacks):
    dist = exact_orders_3(stacks)
    assert abs(dist.total() - 1) < 1e-13
    assert max(abs(r) for r in dist.identity_residuals(stacks)) < 1e-13


@settings(max_examples=15, deadline=None)
@given(st.tuples(*[st.integers(1, 8)] * 4))
def test_four_player_winner_marginals(stacks):
    dist = exact_orders_4(stacks)
    N = sum(stacks)
    for p in range(1, 5):
        assert dist.winner_marginal(p) == pytest.approx(stacks[p - 1] / N, abs=1e-12)


def test_relabeling_symmetry():
    a = exact_orders_3((2, 5, 9))
    b = exact_orders_3((9, 2, 5))
    # player 1 in a is player 2 in b, player 2 -> 3, player 3 -> 1
    relabel = {1: 2, 2: 3, 3: 1}
    for s in all_orders(3):
        assert a[s] == pytest.approx(b[tuple(relabel[p] for p in s)], abs=1e-15)


def test_fifty_chip_solve_is_fast():
    start = time.perf_counter()
    exact_orders_3((7, 19, 24))
    assert time.perf_counter() - start < 10
