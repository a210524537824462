from collections import Counter

import numpy as np
import pytest
from scipy.stats import chi2_contingency

from ruinlab.core import expected_times
from ruinlab.exact import exact_orders_3, exact_orders_4
from ruinlab.montecarlo import (
    draw_consolidated_step,
    estimate_orders,
    estimate_variant,
    run_to_first_bust,
    simulate_to_first_elimination,
)


def test_consolidated_step_conserves_chips():
    rng = np.random.default_rng(5)
    for _ in range(100):
        step = draw_consolidated_step((4, 7, 9), rng)
        assert step.m == 4
        assert sum(step.counts) == 4
        assert all(0 <= w <= n for w, n in zip(step.wins, step.counts))
        d = step.deltas(3)
        assert d.sum() == 0
        assert np.all(np.array((4, 7, 9)) + d >= 0)


def test_first_bust_states_are_on_a_face():
    rng = np.random.default_rng(0)
    state, steps = run_to_first_bust(np.tile((3, 4, 5), (500, 1)), rng)
    assert np.all(state.sum(axis=1) == 12)
    assert np.all((state == 0).sum(axis=1) == 1)
    assert np.all(steps >= 3)
    single, n = simulate_to_first_elimination((3, 4, 5), rng)
    assert sum(single) == 12 and 0 in single and n >= 3


def test_consolidated_and_plain_first_bust_laws_agree():
    n = 40000
    counts = []
    for consolidated, seed in ((True, 11), (False, 12)):
        state, _ = run_to_first_bust(np.tile((2, 3, 5), (n, 1)), np.random.default_rng(seed),
                                     consolidated)
        counts.append(Counter(map(tuple, state)))
    keys = sorted(set(counts[0]) | set(counts[1]))
    table = np.array([[c.get(key, 0) for key in keys] for c in counts])
    table = table[:, table.min(axis=0) >= 5]
    assert chi2_contingency(table)[1] > 1e-3


def test_mean_time_to_first_bust():
    est = estimate_orders((2, 3, 5), 200000, seed=2)
    se = 3 * 9 / np.sqrt(200000)  # generous: sd of the bust time is about the mean
    assert abs(est.mean_rounds - expected_times((2, 3, 5)).t1) < se


def test_agrees_with_exact_at_one_million():
    exact = exact_orders_3((2, 3, 5)).as_floats()
    est = estimate_orders((2, 3, 5), 10 ** 6, seed=7)
    for s, p in exact.items():
        assert abs(est.estimates[s] - p) <= 3 * est.stderr[s]


def test_plain_mode_agrees_with_exact():
    exact = exact_orders_3((2, 3, 5)).as_floats()
    est = estimate_orders((2, 3, 5), 200000, seed=8, mode="plain")
    for s, p in exact.items():
        assert abs(est.estimates[s] - p) <= 4 * est.stderr[s]


def test_four_players():
    exact = exact_orders_4((1, 2, 3, 4)).as_floats()
    est = estimate_orders((1, 2, 3, 4), 200000, seed=9)
    for s, p in exact.items():
        assert abs(est.estimates[s] - p) <= 4 * est.stderr[s] + 1e-12


def test_seed_determines_output_regardless_of_threads():
    a = estimate_orders((3, 4, 5), 30000, seed=42, threads=1, batch_size=4096)
    b = estimate_orders((3, 4, 5), 30000, seed=42, threads=3, batch_size=4096)
    c = estimate_orders((3, 4, 5), 30000, seed=43, threads=1, batch_size=4096)
    assert a.estimates == b.estimates
    assert a.estimates != c.estimates


@pytest.mark.parametrize("variant", ["all_in", "occasional_all_in", "compulsive"])
def test_winner_probability_is_chip_share(variant):
    stacks = (2, 3, 5)
    est = estimate_variant(stacks, variant, 200000, seed=13)
    for p in range(3):
        assert abs(est.winner[p] - stacks[p] / 10) <= 4 * est.winner_stderr[p]


def test_bad_arguments():
    with pytest.raises(ValueError):
        estimate_orders((2, 3, 5), 100, mode="fast")
    with pytest.raises(ValueError):
        estimate_variant((2, 3, 5), "bluff", 100)
    with pytest.raises(ValueError):
        estimate_orders((0, 3, 5), 100)
