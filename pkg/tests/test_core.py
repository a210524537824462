from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given, strategies as st

from ruinlab.core import (
    CapitalVector,
    DimensionError,
    OrderDistribution,
    PayoutSchedule,
    all_orders,
    canonicalize,
    complete_by_identities,
    compose_after_bust,
    expected_times,
    icm_distribution,
    icm_probability,
    parse_order,
    plackett_luce,
    winner_probability,
)

stacks3 = st.tuples(*[st.integers(1, 60)] * 3)
stacks4 = st.tuples(*[st.integers(1, 40)] * 4)


def test_capital_vector_validation():
    assert CapitalVector((1, 2, 3)).N == 6
    with pytest.raises(DimensionError):
        CapitalVector((5,))
    with pytest.raises(DimensionError):
        CapitalVector((1, 1, 1, 1, 1))
    with pytest.raises(ValueError):
        CapitalVector((1, -2, 3))
    with pytest.raises(ValueError):
        CapitalVector((1, 2.5, 3))
    assert not CapitalVector((0, 2, 3)).is_live


def test_parse_order_forms():
    assert parse_order("321") == parse_order(321) == parse_order((3, 2, 1)) == (3, 2, 1)
    with pytest.raises(ValueError):
        parse_order("112")
    with pytest.raises(DimensionError):
        parse_order("12", 3)


def test_all_orders_lexicographic():
    assert all_orders(3) == [(1, 2, 3), (1, 3, 2), (2, 1, 3), (2, 3, 1), (3, 1, 2), (3, 2, 1)]
    assert len(all_orders(4)) == 24


def test_canonicalize_relabels():
    cap, ident = canonicalize((5, 7, 11), "231")
    assert cap.stacks == (7, 11, 5)
    assert ident == (1, 2, 3)


def test_icm_equal_stacks_uniform():
    for s in all_orders(3):
        assert icm_probability((1, 1, 1), s, exact=True) == Fraction(1, 6)


def test_icm_is_plackett_luce_of_reversed_order():
    # winner drawn first: P(321 eliminated) = P(1 wins, then 2, then 3)
    assert icm_probability((1, 2, 3), "321", exact=True) == Fraction(1, 6) * Fraction(2, 5)
    assert plackett_luce((1, 2, 3), (1, 2, 3), exact=True) == Fraction(1, 6) * Fraction(2, 5)


@given(stacks3)
def test_icm_satisfies_identities(stacks):
    dist = icm_distribution(stacks, exact=True)
    assert dist.total() == 1
    assert all(r == 0 for r in dist.identity_residuals(stacks))


@given(stacks4)
def test_icm_winner_marginal_is_chip_share(stacks):
    dist = icm_distribution(stacks, exact=True)
    for p in range(1, 5):
        assert dist.winner_marginal(p) == Fraction(stacks[p - 1], sum(stacks))


def test_winner_probability():
    assert winner_probability((1, 2, 3), 3) == 0.5
    with pytest.raises(IndexError):
        winner_probability((1, 2, 3), 4)


def test_expected_times():
    t = expected_times((1, 2, 3))
    assert t.t1 == 3.0
    assert t.t2 == 11.0
    with pytest.raises(DimensionError):
        expected_times((1, 2, 3, 4))


def test_distribution_validation():
    with pytest.raises(ValueError):
        OrderDistribution(3, {s: 1 / 6 for s in all_orders(3)}, "magic")
    with pytest.raises(DimensionError):
        OrderDistribution(3, {(1, 2, 3): 1.0}, "icm")


def test_complete_by_identities_rational():
    partial = {"213": Fraction(1441, 9456), "312": Fraction(631, 9456), "321": Fraction(569, 9456)}
    dist = complete_by_identities(partial, (1, 2, 3), provenance="exact")
    assert dist[(1, 2, 3)] == Fraction(3287, 9456)
    assert dist.total() == 1


def test_complete_by_identities_rejects_inconsistent():
    with pytest.raises(ValueError):
        complete_by_identities({"213": 0.9, "312": 0.0, "321": 0.0}, (1, 2, 3))


def test_compose_after_bust():
    out = compose_after_bust(2, {(1, 2): 0.25, (2, 1): 0.75}, [1, 3])
    assert out == {(2, 1, 3): 0.25, (2, 3, 1): 0.75}


def test_payout_schedule_rejects_negative():
    assert len(PayoutSchedule([3, 2, 1])) == 3
    with pytest.raises(ValueError):
        PayoutSchedule([1, -1])


@given(stacks3, st.sampled_from(list(permutations((1, 2, 3)))))
def test_canonical_icm_matches(stacks, sigma):
    cap, ident = canonicalize(stacks, sigma)
    assert icm_probability(cap, ident, exact=True) == icm_probability(stacks, sigma, exact=True)
